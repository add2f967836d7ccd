"""Quantum metrics: S_p, E_n, Wigner, fidelity, squeeze decomposition."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epomc import metrics, smallmat
from epomc.metrics import WignerGridSpec


def rot_ccw(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def random_physical_vp(rng, scale=1.0):
    """Random physical 4x4 mechanical covariance: a symplectic transform of
    a thermal state (exact physicality by construction)."""
    # random symplectic: alternate rotations and local squeezers
    v = np.diag(rng.uniform(0.5, 0.5 + 2.0 * scale, size=2).repeat(2))
    for _ in range(3):
        s = np.eye(4)
        for mode in range(2):
            phi = rng.uniform(0, np.pi)
            r = rng.uniform(-0.8, 0.8) * scale
            block = rot_ccw(phi) @ np.diag([np.exp(-r), np.exp(r)]) @ rot_ccw(phi).T
            s[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = block
        v = s @ v @ s.T
        # beamsplitter-like symplectic mixing of the two modes
        theta = rng.uniform(0, 2 * np.pi)
        c, sn = np.cos(theta), np.sin(theta)
        bs = np.block([[c * np.eye(2), sn * np.eye(2)],
                       [-sn * np.eye(2), c * np.eye(2)]])
        v = bs @ v @ bs.T
    return v


def ppt_nu_minus_oracle(vp):
    """Smallest symplectic eigenvalue of the partial transpose, computed via
    the eigenvalues of i Omega V-tilde (independent of the closed form)."""
    p = np.diag([1.0, 1.0, 1.0, -1.0])  # momentum flip on mode 2
    vt = p @ vp @ p
    omega = smallmat.symplectic_form(4)
    vals = np.abs(np.linalg.eigvals(1j * omega @ vt))
    return float(np.sort(vals)[0])


def two_mode_squeezed(r):
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[ch * np.eye(2), sh * z], [sh * z, ch * np.eye(2)]])


class TestPhaseSync:
    def test_vacuum(self):
        vp = 0.5 * np.eye(4)
        assert metrics.phase_sync(vp, 0.3, 1.1) == pytest.approx(1.0)

    def test_thermal_scaling(self):
        nbar = 10.0
        vp = (2 * nbar + 1) / 2.0 * np.eye(4)
        assert metrics.phase_sync(vp, 0.0, 2.0) == pytest.approx(1.0 / 21.0)

    def test_degenerate_collapse_raises(self):
        # Perfectly correlated momenta at zero phases: <dp_-^2> = 0.
        vp = 0.5 * np.eye(4)
        vp[1, 3] = vp[3, 1] = 0.5
        with pytest.raises(metrics.MetricError, match="collapse"):
            metrics.phase_sync(vp, 0.0, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(
        offset=st.floats(0, 2 * np.pi),
        phi1=st.floats(0, 2 * np.pi),
        phi2=st.floats(0, 2 * np.pi),
        seed=st.integers(0, 2 ** 31),
    )
    def test_common_rotation_invariance(self, offset, phi1, phi2, seed):
        # Advancing both mean phases by an offset corresponds to rotating
        # each (q, p) sector counter-clockwise by that offset; doing both
        # leaves S_p unchanged.
        rng = np.random.default_rng(seed)
        vp = random_physical_vp(rng)
        big = np.block([
            [rot_ccw(offset), np.zeros((2, 2))],
            [np.zeros((2, 2)), rot_ccw(offset)],
        ])
        vp_rot = big @ vp @ big.T
        a = metrics.phase_sync(vp, phi1, phi2)
        b = metrics.phase_sync(vp_rot, (phi1 + offset) % (2 * np.pi),
                               (phi2 + offset) % (2 * np.pi))
        assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


class TestLogNegativity:
    def test_separable_vacuum(self):
        en, nu = metrics.log_negativity(0.5 * np.eye(4))
        assert nu == pytest.approx(0.5)
        assert en == 0.0

    def test_two_mode_squeezed_closed_form(self):
        # nu_- = e^{-2r}/2, E_n = 2r for the two-mode squeezed state; checked
        # here at r = 0.5 against the PPT eigen-oracle as well.
        r = 0.5
        vp = two_mode_squeezed(r)
        en, nu = metrics.log_negativity(vp)
        assert nu == pytest.approx(np.exp(-2 * r) / 2.0, rel=1e-12)
        assert en == pytest.approx(1.0, rel=1e-12)
        assert nu == pytest.approx(ppt_nu_minus_oracle(vp), rel=1e-10)

    def test_product_thermal(self):
        nbar = 5.0
        en, nu = metrics.log_negativity((2 * nbar + 1) / 2.0 * np.eye(4))
        assert nu == pytest.approx(5.5)
        assert en == 0.0

    @settings(max_examples=1000, deadline=None)
    @given(seed=st.integers(0, 2 ** 31))
    def test_matches_ppt_oracle(self, seed):
        rng = np.random.default_rng(seed)
        vp = random_physical_vp(rng)
        _, nu = metrics.log_negativity(vp)
        assert abs(nu - ppt_nu_minus_oracle(vp)) < 1e-10 * max(1.0, nu)

    @settings(max_examples=300, deadline=None)
    @given(
        seed=st.integers(0, 2 ** 31),
        phi1=st.floats(0, np.pi),
        phi2=st.floats(0, np.pi),
    )
    def test_local_rotation_invariance(self, seed, phi1, phi2):
        rng = np.random.default_rng(seed)
        vp = random_physical_vp(rng)
        big = np.block([
            [rot_ccw(phi1), np.zeros((2, 2))],
            [np.zeros((2, 2)), rot_ccw(phi2)],
        ])
        en_a, _ = metrics.log_negativity(vp)
        en_b, _ = metrics.log_negativity(big @ vp @ big.T)
        assert en_b == pytest.approx(en_a, abs=1e-10)

    def test_nonphysical_discriminant_raises(self):
        vp = 0.5 * np.eye(4)
        vp[0, 2] = vp[2, 0] = 10.0  # wildly correlated positions only
        with pytest.raises(metrics.MetricError):
            metrics.log_negativity(vp)


class TestWigner:
    def test_vacuum_peak(self):
        grid = metrics.wigner(0.5 * np.eye(2),
                              WignerGridSpec(-3, 3, -3, 3, 121, 121))
        i0 = 60  # center of the symmetric grid
        assert grid.q[i0] == pytest.approx(0.0, abs=1e-12)
        assert grid.w[i0, i0] == pytest.approx(1.0 / np.pi, rel=1e-12)

    def test_gaussian_falloff(self):
        spec = WignerGridSpec(-2, 2, -2, 2, 5, 5)
        grid = metrics.wigner(0.5 * np.eye(2), spec)
        # q = 1 is grid index 3 (axis -2,-1,0,1,2); p = 0 is index 2
        assert grid.w[3, 2] == pytest.approx(np.exp(-1.0) / np.pi, rel=1e-12)

    @pytest.mark.parametrize("vm", [
        0.5 * np.eye(2),
        np.array([[2.0, 0.7], [0.7, 1.1]]),
        np.diag([0.3, 6.0]),
    ])
    def test_normalization(self, vm):
        grid = metrics.wigner(vm, metrics.grid_for_covariance(vm, n=201, n_sigma=6.0))
        assert 0.99 < grid.riemann_sum() < 1.01

    def test_maximum_at_origin(self):
        vm = np.array([[1.5, -0.4], [-0.4, 0.8]])
        grid = metrics.wigner(vm, metrics.grid_for_covariance(vm, n=101))
        imax = np.unravel_index(np.argmax(grid.w), grid.w.shape)
        assert abs(grid.q[imax[0]]) < 1e-12
        assert abs(grid.p[imax[1]]) < 1e-12

    def test_nonpositive_det_raises(self):
        with pytest.raises(metrics.MetricError):
            metrics.wigner(np.array([[1.0, 2.0], [2.0, 1.0]]),
                           WignerGridSpec(-1, 1, -1, 1, 3, 3))


class TestFidelity:
    def test_identical_states(self):
        v = 0.5 * np.eye(2)
        assert metrics.fidelity(v, v) == pytest.approx(1.0, rel=1e-12)

    def test_vacuum_thermal_closed_form(self):
        # f = 1/(nbar + 1): Delta = (nbar+1)^2, delta = 0.
        nbar = 3.0
        v1 = 0.5 * np.eye(2)
        v2 = (2 * nbar + 1) / 2.0 * np.eye(2)
        assert metrics.fidelity(v1, v2) == pytest.approx(0.25, rel=1e-12)

    def test_displaced_vacuum(self):
        # Two coherent states separated by dq = 2: the overlap formula gives
        # exp(-dq^2 / (2 (V1+V2)_qq)) = e^-2, matching |<alpha|beta>|^2 with
        # |alpha - beta|^2 = dq^2/2 = 2.
        v = 0.5 * np.eye(2)
        f = metrics.fidelity(v, v, u1=(2.0, 0.0), u2=(0.0, 0.0))
        assert f == pytest.approx(np.exp(-2.0), rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(
        n1=st.floats(0, 5), n2=st.floats(0, 5),
        r1=st.floats(0, 1), r2=st.floats(0, 1),
        p1=st.floats(0, np.pi), p2=st.floats(0, np.pi),
    )
    def test_symmetry_and_unit_range(self, n1, n2, r1, r2, p1, p2):
        v1 = (2 * n1 + 1) * 0.5 * rot_ccw(p1) @ np.diag(
            [np.exp(-2 * r1), np.exp(2 * r1)]) @ rot_ccw(p1).T
        v2 = (2 * n2 + 1) * 0.5 * rot_ccw(p2) @ np.diag(
            [np.exp(-2 * r2), np.exp(2 * r2)]) @ rot_ccw(p2).T
        f12 = metrics.fidelity(v1, v2)
        f21 = metrics.fidelity(v2, v1)
        assert f12 == pytest.approx(f21, rel=1e-12)
        assert 0.0 < f12 <= 1.0 + 1e-12

    def test_identity_iff_equal(self):
        v1 = np.array([[0.7, 0.1], [0.1, 0.9]])
        v2 = np.array([[0.7, 0.1], [0.1, 1.2]])
        assert metrics.fidelity(v1, v1) == pytest.approx(1.0, rel=1e-9)
        assert metrics.fidelity(v1, v2) < 1.0 - 1e-9

    def test_below_uncertainty_domain_error(self):
        v1 = np.diag([0.1, 0.1])   # det < 1/4: nonphysical
        v2 = 1.5 * np.eye(2)       # thermal, det > 1/4
        with pytest.raises(metrics.MetricError, match="delta"):
            metrics.fidelity(v1, v2)

    def test_not_positive_definite(self):
        with pytest.raises(metrics.MetricError):
            metrics.fidelity(np.diag([1.0, -1.0]), 0.5 * np.eye(2))


class TestSqueezeRotation:
    def test_vacuum(self):
        sr = metrics.squeeze_rotation(0.5 * np.eye(2))
        assert sr.r == pytest.approx(0.0, abs=1e-15)
        assert sr.n_eff == pytest.approx(0.0, abs=1e-15)
        assert sr.phi == 0.0

    def test_axis_aligned(self):
        sr = metrics.squeeze_rotation(0.5 * np.diag([np.exp(-1), np.exp(1)]))
        assert sr.r == pytest.approx(0.5, rel=1e-12)
        assert sr.n_eff == pytest.approx(0.0, abs=1e-12)
        # anti-squeezed axis along p: zero angle from the momentum axis
        assert sr.phi == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=1000, deadline=None)
    @given(
        r0=st.floats(0.01, 1.5),
        phi0=st.floats(0.0, np.pi - 1e-6),
        n0=st.floats(0.0, 10.0),
    )
    def test_round_trip(self, r0, phi0, n0):
        vm = (2 * n0 + 1) * 0.5 * rot_ccw(phi0) @ np.diag(
            [np.exp(-2 * r0), np.exp(2 * r0)]) @ rot_ccw(phi0).T
        sr = metrics.squeeze_rotation(vm)
        assert sr.r == pytest.approx(r0, rel=1e-9, abs=1e-9)
        assert sr.n_eff == pytest.approx(n0, rel=1e-9, abs=1e-9)
        dphi = abs((sr.phi - phi0 + np.pi / 2) % np.pi - np.pi / 2)
        assert dphi < 1e-9
        rebuilt = metrics.reconstruct_squeeze_rotation(sr)
        assert np.abs(rebuilt - vm).max() < 1e-9 * max(1.0, np.abs(vm).max())

    def test_nonpositive_raises(self):
        with pytest.raises(metrics.MetricError):
            metrics.squeeze_rotation(np.diag([0.0, 1.0]))


class TestTimeAverage:
    def test_constant(self):
        t = np.linspace(0, 10, 101)
        assert metrics.time_average(t, np.full_like(t, 3.5), 0, 10) == pytest.approx(3.5)

    def test_sine_over_whole_periods(self):
        t = np.linspace(0, 8 * np.pi, 16001)
        avg = metrics.time_average(t, np.sin(t), 0.0, 8 * np.pi)
        assert abs(avg) < 1e-10

    def test_matches_rectangle_oracle(self):
        rng = np.random.default_rng(12)
        t = np.linspace(0, 100, 5001)
        y = np.abs(rng.normal(size=t.size)).cumsum() / t.size  # smooth-ish ramp
        got = metrics.time_average(t, y, 20.0, 90.0)
        m = (t >= 20.0) & (t <= 90.0)
        # midpoint rectangle rule as an independent quadrature
        tm, ym = t[m], y[m]
        mid = 0.5 * (ym[1:] + ym[:-1])
        rect = float(np.sum(mid * np.diff(tm)) / (tm[-1] - tm[0]))
        assert got == pytest.approx(rect, abs=1e-6)

    def test_default_window_is_trailing_half(self):
        t = np.linspace(0, 10, 1001)
        y = np.where(t < 5, 0.0, 2.0)
        assert metrics.time_average(t, y) == pytest.approx(2.0, rel=1e-3)

    def test_empty_window(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(ValueError):
            metrics.time_average(t, t, 0.5, 0.5)


class TestMechSubmatrix:
    def test_extraction_indices(self):
        v8 = np.arange(64, dtype=float).reshape(8, 8)
        v8 = v8 + v8.T
        vp = metrics.mech_submatrix(v8)
        for a, i in enumerate((0, 1, 4, 5)):
            for b, j in enumerate((0, 1, 4, 5)):
                assert vp[a, b] == v8[i, j]
