"""Scalar and phase-space diagnostics computed from covariance data.

Everything here is a pure function of a covariance matrix (and, for phase
synchronization, the classical mean phases): the Mari phase-synchronization
measure S_p, logarithmic negativity E_n with its PPT symplectic eigenvalue
nu_-, Gaussian Wigner surfaces, single-mode Gaussian fidelity, the
squeezing/rotation decomposition of a 2x2 covariance block, and trapezoidal
time averages.

Conventions: vacuum variance is 1/2 per quadrature; the mechanical
submatrix V' uses the order (dq1, dp1, dq2, dp2); natural logarithm for
E_n (recorded as ``LOG_BASE``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import smallmat
from .fluctuations import MECH_INDICES, CovarianceSeries

LOG_BASE = "e"

#: The variance of the momentum-error operator below this is treated as a
#: nonphysical collapse rather than synchronization.
MOMENTUM_ERROR_FLOOR = 1e-15


class MetricError(ValueError):
    """A metric is undefined for the supplied covariance data."""


def mech_submatrix(v8: np.ndarray) -> np.ndarray:
    """Extract the 4x4 mechanical submatrix V' from the full 8x8 V."""
    v8 = np.asarray(v8, dtype=float)
    if v8.shape != (8, 8):
        raise MetricError(f"expected an 8x8 covariance, got {v8.shape}")
    idx = np.ix_(MECH_INDICES, MECH_INDICES)
    return v8[idx]


def _check_vp(vp: np.ndarray) -> np.ndarray:
    vp = np.asarray(vp, dtype=float)
    if vp.shape != (4, 4):
        raise MetricError(f"expected a 4x4 mechanical submatrix, got {vp.shape}")
    if np.abs(vp - vp.T).max() > 1e-8:
        raise MetricError("mechanical submatrix is not symmetric")
    return vp


def rotated_momentum_error_variance(vp: np.ndarray, phi1: float, phi2: float) -> float:
    """<dp'_-^2> with each oscillator rotated by its classical mean phase.

    The rotation acts on the (p, q) pair as p' = cos(phi) p - sin(phi) q,
    so the co-rotating momentum error is dp'_- = (dp'_1 - dp'_2)/sqrt(2).
    """
    vp = _check_vp(vp)
    c1, s1 = np.cos(phi1), np.sin(phi1)
    c2, s2 = np.cos(phi2), np.sin(phi2)
    # Indices in V': q1=0, p1=1, q2=2, p2=3.
    var1 = c1 * c1 * vp[1, 1] + s1 * s1 * vp[0, 0] - 2.0 * c1 * s1 * vp[0, 1]
    var2 = c2 * c2 * vp[3, 3] + s2 * s2 * vp[2, 2] - 2.0 * c2 * s2 * vp[2, 3]
    cov = (c1 * c2 * vp[1, 3] - c1 * s2 * vp[1, 2]
           - s1 * c2 * vp[0, 3] + s1 * s2 * vp[0, 2])
    return float(0.5 * (var1 + var2 - 2.0 * cov))


def rotated_position_error_variance(vp: np.ndarray, phi1: float, phi2: float) -> float:
    """<dq'_-^2>, the position-error counterpart (reported as a diagnostic)."""
    vp = _check_vp(vp)
    c1, s1 = np.cos(phi1), np.sin(phi1)
    c2, s2 = np.cos(phi2), np.sin(phi2)
    # q' = sin(phi) p + cos(phi) q
    var1 = s1 * s1 * vp[1, 1] + c1 * c1 * vp[0, 0] + 2.0 * c1 * s1 * vp[0, 1]
    var2 = s2 * s2 * vp[3, 3] + c2 * c2 * vp[2, 2] + 2.0 * c2 * s2 * vp[2, 3]
    cov = (s1 * s2 * vp[1, 3] + s1 * c2 * vp[1, 2]
           + c1 * s2 * vp[0, 3] + c1 * c2 * vp[0, 2])
    return float(0.5 * (var1 + var2 - 2.0 * cov))


def phase_sync(vp: np.ndarray, phi1: float, phi2: float) -> float:
    """Mari phase-synchronization measure S_p = 1 / (2 <dp'_-^2>)."""
    var = rotated_momentum_error_variance(vp, phi1, phi2)
    if var < MOMENTUM_ERROR_FLOOR:
        raise MetricError(
            f"momentum-error variance {var:.3e} below {MOMENTUM_ERROR_FLOOR:g}; "
            "nonphysical collapse"
        )
    return 0.5 / var


def log_negativity(vp: np.ndarray):
    """Logarithmic negativity of the mechanical pair.

    Returns ``(E_n, nu_minus)`` where nu_minus is the smallest symplectic
    eigenvalue of the partially transposed V',

        nu_- = sqrt((Sigma - sqrt(Sigma^2 - 4 det V')) / 2),
        Sigma = det V_m1 + det V_m2 - 2 det V_m1m2,

    and E_n = max(0, -ln(2 nu_-)).  Entanglement iff nu_- < 1/2.
    """
    vp = _check_vp(vp)
    det_m1 = smallmat.det(vp[:2, :2])
    det_m2 = smallmat.det(vp[2:, 2:])
    det_c = float(np.linalg.det(vp[:2, 2:]))
    det_vp = smallmat.det(vp)
    sigma = det_m1 + det_m2 - 2.0 * det_c
    disc = sigma * sigma - 4.0 * det_vp
    if disc < -1e-12:
        raise MetricError(
            f"PPT discriminant {disc:.3e} < 0: complex symplectic eigenvalue, "
            "nonphysical input"
        )
    inner = 0.5 * (sigma - np.sqrt(max(disc, 0.0)))
    if inner < 0.0:
        if inner < -1e-12:
            raise MetricError(f"negative nu_-^2 = {inner:.3e}: nonphysical input")
        inner = 0.0
    nu_minus = float(np.sqrt(inner))
    if nu_minus <= 0.0:
        raise MetricError("vanishing PPT symplectic eigenvalue")
    en = max(0.0, -float(np.log(2.0 * nu_minus)))
    return en, nu_minus


@dataclass(frozen=True)
class WignerGridSpec:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int = 201
    n_p: int = 201


def grid_for_covariance(vm: np.ndarray, n: int = 201, n_sigma: float = 6.0) -> WignerGridSpec:
    """Symmetric grid covering +-n_sigma standard deviations of each axis."""
    vm = np.asarray(vm, dtype=float)
    sq = float(np.sqrt(vm[0, 0]))
    sp = float(np.sqrt(vm[1, 1]))
    return WignerGridSpec(
        q_min=-n_sigma * sq, q_max=n_sigma * sq,
        p_min=-n_sigma * sp, p_max=n_sigma * sp,
        n_q=n, n_p=n,
    )


@dataclass
class WignerGrid:
    q: np.ndarray       # axis values, length n_q
    p: np.ndarray       # axis values, length n_p
    w: np.ndarray       # values, shape (n_q, n_p); w[i, j] = W(q[i], p[j])

    def riemann_sum(self) -> float:
        dq = self.q[1] - self.q[0]
        dp = self.p[1] - self.p[0]
        return float(self.w.sum() * dq * dp)


def wigner(vm: np.ndarray, grid: WignerGridSpec) -> WignerGrid:
    """Gaussian Wigner surface of a single mode with zero first moments.

        W(q, p) = exp(-u V^{-1} u^T / 2) / (2 pi sqrt(det V))
    """
    vm = np.asarray(vm, dtype=float)
    if vm.shape != (2, 2):
        raise MetricError(f"expected a 2x2 covariance, got {vm.shape}")
    if np.abs(vm[0, 1] - vm[1, 0]) > 1e-10:
        raise MetricError("covariance is not symmetric")
    d = smallmat.det(vm)
    if d <= 0.0:
        raise MetricError(f"non-positive covariance determinant {d:.3e}")
    inv = np.array([[vm[1, 1], -vm[0, 1]], [-vm[0, 1], vm[0, 0]]]) / d
    q = np.linspace(grid.q_min, grid.q_max, grid.n_q)
    p = np.linspace(grid.p_min, grid.p_max, grid.n_p)
    qq = q[:, None]
    pp = p[None, :]
    quad = inv[0, 0] * qq ** 2 + 2.0 * inv[0, 1] * qq * pp + inv[1, 1] * pp ** 2
    w = np.exp(-0.5 * quad) / (2.0 * np.pi * np.sqrt(d))
    return WignerGrid(q=q, p=p, w=w)


def fidelity(v1: np.ndarray, v2: np.ndarray, u1=None, u2=None) -> float:
    """Single-mode Gaussian fidelity between (u1, V1) and (u2, V2).

        f = exp[-(u1-u2) (V1+V2)^{-1} (u1-u2)^T / 2] / (sqrt(D + d) - sqrt(d))
        D = det(V1 + V2),  d = 4 (det V1 - 1/4)(det V2 - 1/4)

    Defined for physical single-mode covariances (det V >= 1/4, positive
    definite); inputs outside that domain raise :class:`MetricError`.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    for name, v in (("v1", v1), ("v2", v2)):
        if v.shape != (2, 2):
            raise MetricError(f"{name} must be 2x2, got {v.shape}")
        if np.abs(v[0, 1] - v[1, 0]) > 1e-10:
            raise MetricError(f"{name} is not symmetric")
        if v[0, 0] <= 0 or smallmat.det(v) <= 0:
            raise MetricError(f"{name} is not positive definite")
    du = np.zeros(2) if u1 is None and u2 is None else (
        np.asarray(u1, dtype=float) - np.asarray(u2, dtype=float)
    )
    vsum = v1 + v2
    big_delta = smallmat.det(vsum)
    small_delta = 4.0 * (smallmat.det(v1) - 0.25) * (smallmat.det(v2) - 0.25)
    if small_delta < 0.0:
        if small_delta < -1e-12:
            raise MetricError(
                f"fidelity undefined: delta = {small_delta:.3e} < 0 "
                "(an input is below the single-mode uncertainty bound)"
            )
        small_delta = 0.0
    denom = np.sqrt(big_delta + small_delta) - np.sqrt(small_delta)
    inv = np.linalg.inv(vsum)
    expo = -0.5 * float(du @ inv @ du)
    return float(np.exp(expo) / denom)


@dataclass(frozen=True)
class SqueezeRotation:
    r: float        # squeezing parameter, >= 0
    phi: float      # rotation angle in [0, pi); the anti-squeezed principal
                    # axis sits at phi measured from the momentum axis
    n_eff: float    # effective thermal factor of the decomposition


def squeeze_rotation(vm: np.ndarray) -> SqueezeRotation:
    """Decompose a 2x2 covariance as (2 n_eff + 1) R(phi) S(2r) R(phi)^T / 2.

    S(2r) = diag(e^{-2r}, e^{+2r}) acts on the vacuum variance 1/2, R is the
    counter-clockwise rotation.  Recovered from the eigenvalues l1 <= l2 as
    n_eff = (2 sqrt(l1 l2) - 1)/2 and r = ln(l2/l1)/4.
    """
    vals, theta = smallmat.sym_eig_2x2(np.asarray(vm, dtype=float))
    l1, l2 = float(vals[0]), float(vals[1])
    if l1 <= 0.0:
        raise MetricError(f"covariance has non-positive eigenvalue {l1:.3e}")
    n_eff = 0.5 * (2.0 * np.sqrt(l1 * l2) - 1.0)
    r = 0.25 * float(np.log(l2 / l1))
    phi = (-theta) % np.pi
    if r < 1e-15:
        phi = 0.0  # rotation is undefined for an isotropic state
    return SqueezeRotation(r=r, phi=phi, n_eff=float(n_eff))


def reconstruct_squeeze_rotation(sr: SqueezeRotation) -> np.ndarray:
    """Inverse of :func:`squeeze_rotation`, for round-trip checks."""
    rot = smallmat.rot2_ccw(sr.phi)
    s = np.diag([np.exp(-2.0 * sr.r), np.exp(2.0 * sr.r)])
    return (2.0 * sr.n_eff + 1.0) * 0.5 * (rot @ s @ rot.T)


def time_average(t, values, t_start: Optional[float] = None,
                 t_end: Optional[float] = None) -> float:
    """Trapezoidal time average of ``values`` over [t_start, t_end].

    Defaults to the trailing half of the series, discarding transients.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != values.shape:
        raise ValueError("t and values must be 1-D arrays of equal length")
    if t_start is None and t_end is None:
        t_start = t[0] + 0.5 * (t[-1] - t[0])
    if t_start is None:
        t_start = t[0]
    if t_end is None:
        t_end = t[-1]
    if not t_start < t_end:
        raise ValueError(f"empty averaging window [{t_start:g}, {t_end:g}]")
    m = (t >= t_start) & (t <= t_end)
    if m.sum() < 2:
        raise ValueError("averaging window contains fewer than two samples")
    tt = t[m]
    return float(np.trapezoid(values[m], tt) / (tt[-1] - tt[0]))


@dataclass
class MetricSeries:
    """Derived scalar series along a covariance trajectory.

    ``f`` entries are NaN where the fidelity formula leaves its domain
    (covariance below the single-mode uncertainty bound, an artifact of the
    reference linearization); CSV export renders those as empty fields.
    """

    t: np.ndarray
    s_p: np.ndarray
    e_n: np.ndarray
    nu_minus: np.ndarray
    r1: np.ndarray
    phi1: np.ndarray
    r2: np.ndarray
    phi2: np.ndarray
    f: np.ndarray
    amp1: np.ndarray     # classical mean amplitudes sqrt(q^2 + p^2)
    amp2: np.ndarray
    qp_ratio: np.ndarray  # <dq'_-^2> / <dp'_-^2> diagnostic


def metric_series(series: CovarianceSeries) -> MetricSeries:
    """Evaluate all per-sample metrics along a propagated covariance series.

    Phases for the S_p rotation are the classical mean phases at the same
    output timestamp (no interpolation between samples).  Samples where a
    metric leaves its domain (runaway or nonphysical covariance data) are
    recorded as NaN rather than aborting the series.
    """
    n = len(series.t)
    out = {name: np.full(n, np.nan) for name in
           ("s_p", "e_n", "nu_minus", "r1", "phi1", "r2", "phi2", "f",
            "amp1", "amp2", "qp_ratio")}
    from .classical import P1, P2, Q1, Q2, phase_from_qp

    for k in range(n):
        state = series.states[k]
        vp = mech_submatrix(series.covs[k])
        ph1 = phase_from_qp(state[Q1], state[P1])
        ph2 = phase_from_qp(state[Q2], state[P2])
        try:
            out["s_p"][k] = phase_sync(vp, ph1, ph2)
            var_p = rotated_momentum_error_variance(vp, ph1, ph2)
            var_q = rotated_position_error_variance(vp, ph1, ph2)
            out["qp_ratio"][k] = var_q / var_p
        except MetricError:
            pass
        try:
            en, nu = log_negativity(vp)
            out["e_n"][k] = en
            out["nu_minus"][k] = nu
        except MetricError:
            pass
        try:
            sr1 = squeeze_rotation(vp[:2, :2])
            sr2 = squeeze_rotation(vp[2:, 2:])
            out["r1"][k], out["phi1"][k] = sr1.r, sr1.phi
            out["r2"][k], out["phi2"][k] = sr2.r, sr2.phi
        except (MetricError, smallmat.MatrixError):
            pass
        try:
            out["f"][k] = fidelity(vp[:2, :2], vp[2:, 2:])
        except MetricError:
            pass
        out["amp1"][k] = np.hypot(state[Q1], state[P1])
        out["amp2"][k] = np.hypot(state[Q2], state[P2])
    return MetricSeries(t=series.t.copy(), **out)
