"""Linearized quadrature fluctuations: drift matrix, Lyapunov propagation,
and linear stability scans.

The fluctuation vector is ordered

    u = (dq1, dp1, dx1, dy1, dq2, dp2, dx2, dy2)

with optical quadratures x = (da^+ + da)/sqrt(2), y = i(da^+ - da)/sqrt(2).
The covariance matrix V = <u u^T>_sym obeys the Lyapunov equation

    dV/dt = A(t) V + V A(t)^T + N

driven by the classical mean trajectory through the drift matrix A(t) and
fed by the diffusion matrix N = diag(0, gamma_m1 (2 nbar + 1), kappa, kappa,
0, gamma_m2 (2 nbar + 1), kappa, kappa).  This normalization makes the
vacuum (V_xx = V_yy = 1/2) the exact fixed point of the optical sector and
(2 nbar + 1)/2 the rotation-averaged mechanical fixed point.

The drift matrix reproduces the reference linearization entry for entry,
including the sign of the d(dx_j)/d(dq_j) = +sqrt(2) g0 Im<a_j> coupling.
That sign makes A depart from a Hamiltonian-plus-dissipation generator, so
propagated covariances are not guaranteed to respect the symplectic
uncertainty bound; the propagator therefore records the minimum symplectic
eigenvalue at every output sample as a diagnostic instead of hard-failing,
and callers opt into an abort threshold where they need one.

V is integrated as its 36 upper-triangle components co-packed with the 8
classical means, so symmetry is exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import classical, ode, smallmat
from .classical import ClassicalState, ClassicalTrajectory
from .model import SystemParams

UQ1, UP1, UX1, UY1, UQ2, UP2, UX2, UY2 = range(8)

U_LABELS = ("q1", "p1", "x1", "y1", "q2", "p2", "x2", "y2")

#: Row/column indices of the mechanical submatrix inside the 8x8 V.
MECH_INDICES = (UQ1, UP1, UQ2, UP2)

_IU = np.triu_indices(8)
_IL = (_IU[1], _IU[0])

#: |V| beyond this marks runaway fluctuation growth (linearization breakdown).
COVARIANCE_CAP = 1e12

#: Default stability dead-band: eigenvalues this close to zero count as
#: marginal, not unstable.
STABILITY_DEAD_BAND = 1e-8


class PhysicalityError(RuntimeError):
    """Covariance dropped below the requested symplectic floor."""

    def __init__(self, message, t, violation):
        super().__init__(message)
        self.t = t
        self.violation = violation


def pack_upper(v: np.ndarray) -> np.ndarray:
    return np.asarray(v)[_IU]


def unpack_upper(tri: np.ndarray) -> np.ndarray:
    v = np.empty((8, 8))
    v[_IU] = tri
    v[_IL] = tri
    return v


def vacuum_covariance() -> np.ndarray:
    return 0.5 * np.eye(8)


def _drift_constants(params: SystemParams):
    return (
        params.omega_m1, params.gamma_m1, params.delta1,
        params.omega_m2, params.gamma_m2, params.delta2,
        params.g0, params.j_coupling, params.kappa,
    )


def _fill_drift(a: np.ndarray, y: np.ndarray, c) -> None:
    """Write the drift matrix for classical state ``y`` into ``a`` in place.

    ``y`` uses the classical layout (re_a1, im_a1, q1, p1, re_a2, ...).
    """
    om1, gm1, d1, om2, gm2, d2, g0, j, kappa = c
    s2g = np.sqrt(2.0) * g0
    for (co, uo, om, gm, delta, other_uq) in (
        (0, 0, om1, gm1, d1, UQ2),
        (4, 4, om2, gm2, d2, UQ1),
    ):
        re_a = y[co + 0]
        im_a = y[co + 1]
        q = y[co + 2]
        deff = delta + g0 * q
        a[uo + 0, uo + 1] = om
        a[uo + 1, uo + 0] = -om
        a[uo + 1, uo + 1] = -gm
        a[uo + 1, uo + 2] = s2g * re_a
        a[uo + 1, uo + 3] = s2g * im_a
        a[uo + 1, other_uq] = j
        a[uo + 2, uo + 0] = s2g * im_a
        a[uo + 2, uo + 2] = -kappa
        a[uo + 2, uo + 3] = -deff
        a[uo + 3, uo + 0] = s2g * re_a
        a[uo + 3, uo + 2] = deff
        a[uo + 3, uo + 3] = -kappa


def drift_matrix(state: ClassicalState, params: SystemParams) -> np.ndarray:
    """The 8x8 drift matrix A at a classical mean state."""
    y = state.to_array() if isinstance(state, ClassicalState) else np.asarray(state, float)
    if not np.all(np.isfinite(y)):
        raise ValueError("classical state has non-finite entries")
    a = np.zeros((8, 8))
    _fill_drift(a, y, _drift_constants(params))
    return a


def noise_matrix(params: SystemParams) -> np.ndarray:
    """Diagonal diffusion matrix N."""
    therm1 = params.gamma_m1 * (2.0 * params.n_thermal + 1.0)
    therm2 = params.gamma_m2 * (2.0 * params.n_thermal + 1.0)
    k = params.kappa
    return np.diag([0.0, therm1, k, k, 0.0, therm2, k, k])


@dataclass
class CovarianceSeries:
    t: np.ndarray               # sample times
    states: np.ndarray          # classical means, shape (n, 8)
    covs: np.ndarray            # covariance matrices, shape (n, 8, 8)
    min_symplectic: np.ndarray  # min symplectic eigenvalue of V per sample
    status: str
    n_steps: int
    n_rejected: int

    @property
    def worst_violation(self) -> float:
        """Largest dip of the symplectic floor below 1/2 (0 when none)."""
        return max(0.0, 0.5 - float(self.min_symplectic.min()))

    @property
    def max_abs_cov(self) -> float:
        return float(np.abs(self.covs).max())

    def classical_trajectory(self) -> ClassicalTrajectory:
        return ClassicalTrajectory(
            t=self.t, states=self.states, status=self.status,
            n_steps=self.n_steps, n_rejected=self.n_rejected,
        )


def propagate(
    params: SystemParams,
    t_end: float,
    dt_out: float,
    v0: Optional[np.ndarray] = None,
    init: Optional[ClassicalState] = None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    physicality_abort: Optional[float] = None,
) -> CovarianceSeries:
    """Co-integrate the mean-field equations and the Lyapunov equation.

    The coupled system has 8 + 36 unknowns (means plus the upper triangle of
    V).  ``v0`` defaults to the vacuum/ground-state covariance I/2 and must
    be symmetric and physical.  Integration halts with a divergent status if
    any mean passes the classical divergence cap or any covariance entry
    passes ``COVARIANCE_CAP``.

    ``physicality_abort``, when given, raises :class:`PhysicalityError` as
    soon as an output sample's minimum symplectic eigenvalue drops below
    ``0.5 - physicality_abort``.  The default keeps it as a recorded
    diagnostic only, because the reference linearization itself walks below
    the bound on driven scenarios.
    """
    if v0 is None:
        v0 = vacuum_covariance()
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (8, 8):
        raise ValueError(f"v0 must be 8x8, got {v0.shape}")
    if np.abs(v0 - v0.T).max() >= 1e-9:
        raise ValueError("v0 must be symmetric within 1e-9")
    if float(smallmat.symplectic_eigenvalues(v0)[0]) < 0.5 - 1e-6:
        raise ValueError("v0 is not a physical covariance matrix")

    y0 = np.concatenate([(init or classical.ZERO_STATE).to_array(), pack_upper(v0)])
    t_out = classical._output_grid(t_end, dt_out)

    consts = _drift_constants(params)
    n_diag = np.diag(noise_matrix(params))
    a_buf = np.zeros((8, 8))
    v_buf = np.empty((8, 8))
    dy = np.empty(44)

    def f(t, y):
        dy[:8] = classical.rhs_array(y[:8], params)
        v_buf[_IU] = y[8:]
        v_buf[_IL] = y[8:]
        _fill_drift(a_buf, y[:8], consts)
        m = a_buf @ v_buf
        m = m + m.T
        m[np.diag_indices_from(m)] += n_diag
        dy[8:] = m[_IU]
        # The integrator copies the returned vector before the next call,
        # so handing back the shared buffer is safe and saves an allocation.
        return dy

    try:
        res = ode.integrate(
            f, (0.0, t_end), y0, t_out, rtol=rtol, atol=atol, max_abs=COVARIANCE_CAP
        )
    except ode.StepSizeUnderflow as exc:
        raise classical.IntegrationFailure(
            f"step size underflow at t={exc.t:g}", exc.t, exc.y[:8]
        ) from exc

    n = len(res.t)
    covs = np.empty((n, 8, 8))
    min_nu = np.empty(n)
    for k in range(n):
        covs[k] = unpack_upper(res.y[k, 8:])
        min_nu[k] = smallmat.symplectic_eigenvalues(covs[k])[0]
        if physicality_abort is not None and min_nu[k] < 0.5 - physicality_abort:
            raise PhysicalityError(
                f"symplectic floor violated by {0.5 - min_nu[k]:.3e} "
                f"at t={res.t[k]:g} (threshold {physicality_abort:g})",
                t=float(res.t[k]),
                violation=float(0.5 - min_nu[k]),
            )
    return CovarianceSeries(
        t=res.t,
        states=res.y[:, :8],
        covs=covs,
        min_symplectic=min_nu,
        status=res.status,
        n_steps=res.n_steps,
        n_rejected=res.n_rejected,
    )


@dataclass
class StabilityPoint:
    drive: float
    max_re_eig: float
    stable: bool
    error: Optional[str] = None


def stability_scan(
    params: SystemParams,
    drives,
    dead_band: float = STABILITY_DEAD_BAND,
) -> list:
    """Max real drift eigenvalue at the classical fixed point per drive.

    The fixed point comes from damped Newton continuation along the
    ascending drive list (warm starts keep the branch).  A point whose
    fixed-point search fails is flagged with an error instead of aborting
    the scan.
    """
    drives = [float(d) for d in drives]
    if not drives:
        raise ValueError("drives must be non-empty")
    points = []
    q_warm = (0.0, 0.0)
    for e in drives:
        p = params.replace(drive=e)
        try:
            fp = classical.fixed_point(p, q_init=q_warm)
            q_warm = (fp.q1, fp.q2)
            eigs = smallmat.eigenvalues(drift_matrix(fp, p))
            max_re = float(eigs.real.max())
            points.append(StabilityPoint(e, max_re, stable=max_re < -dead_band))
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            points.append(StabilityPoint(e, float("nan"), False, error=str(exc)))
    return points
