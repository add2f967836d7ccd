"""Mean-field dynamics of the coupled gain-loss cavity pair.

The classical equations of motion for the intracavity fields and mechanical
quadratures,

    d<a_j>/dt = -(kappa - i Delta_j) <a_j> + i g0 <q_j> <a_j> + E
    d<q_j>/dt = omega_mj <p_j>
    d<p_j>/dt = -omega_mj <q_j> - gamma_mj <p_j> + J <q_{3-j}> + g0 |<a_j>|^2

are integrated with the adaptive RK 4(5) scheme in :mod:`epomc.ode`.  On top
of the raw trajectories this module classifies the long-time regime
(decaying spiral, bounded-but-unsettled amplification, or a stationary limit
cycle), extracts oscillation amplitudes and mean phases, scans amplitude
against drive strength, and solves for the algebraic fixed point.

State layout (also the trajectory CSV column order):
    index 0..7 = (re_a1, im_a1, q1, p1, re_a2, im_a2, q2, p2)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ode
from .model import SystemParams

RE_A1, IM_A1, Q1, P1, RE_A2, IM_A2, Q2, P2 = range(8)

STATE_COLUMNS = ("re_a1", "im_a1", "q1", "p1", "re_a2", "im_a2", "q2", "p2")

#: Any state component beyond this magnitude counts as integration blow-up.
DIVERGENCE_CAP = 1e12

#: Oscillation amplitudes below this floor count as "no oscillation".
AMPLITUDE_FLOOR = 1e-3

#: Maximum relative window-to-window amplitude change for a limit cycle.
STATIONARITY_TOL = 0.02

REGIME_DECAYING = "decaying"
REGIME_LIMIT_CYCLE = "limit_cycle"
REGIME_AMPLIFYING = "amplifying"
REGIME_DIVERGENT = "divergent"


class IntegrationFailure(RuntimeError):
    """Integration could not proceed; carries the last good (t, state)."""

    def __init__(self, message, t, state):
        super().__init__(message)
        self.t = t
        self.state = np.array(state)


@dataclass(frozen=True)
class ClassicalState:
    re_a1: float = 0.0
    im_a1: float = 0.0
    q1: float = 0.0
    p1: float = 0.0
    re_a2: float = 0.0
    im_a2: float = 0.0
    q2: float = 0.0
    p2: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.re_a1, self.im_a1, self.q1, self.p1,
             self.re_a2, self.im_a2, self.q2, self.p2]
        )

    @classmethod
    def from_array(cls, y) -> "ClassicalState":
        y = np.asarray(y, dtype=float)
        return cls(*map(float, y))

    @property
    def a1(self) -> complex:
        return self.re_a1 + 1j * self.im_a1

    @property
    def a2(self) -> complex:
        return self.re_a2 + 1j * self.im_a2


ZERO_STATE = ClassicalState()


@dataclass
class ClassicalTrajectory:
    t: np.ndarray              # sample times, t[0] == 0
    states: np.ndarray         # shape (len(t), 8), STATE_COLUMNS order
    status: str                # ode.STATUS_DONE or ode.STATUS_DIVERGENT
    n_steps: int
    n_rejected: int

    def state_at(self, index: int) -> ClassicalState:
        return ClassicalState.from_array(self.states[index])

    @property
    def diverged(self) -> bool:
        return self.status == ode.STATUS_DIVERGENT


@dataclass
class RegimeReport:
    regime: str
    amplitude1: float
    amplitude2: float
    decay_rate: Optional[float] = None     # decaying regime only
    locked_phase: Optional[float] = None   # limit-cycle regime only


def rhs_array(y: np.ndarray, params: SystemParams) -> np.ndarray:
    """Time derivative of the packed state vector."""
    out = np.empty(8)
    e = params.drive
    g0 = params.g0
    j = params.j_coupling
    for (off, om, gm, delta, other_q) in (
        (0, params.omega_m1, params.gamma_m1, params.delta1, Q2),
        (4, params.omega_m2, params.gamma_m2, params.delta2, Q1),
    ):
        re_a, im_a, q, p = y[off:off + 4]
        # -(kappa - i Delta_eff) a + E, with Delta_eff = Delta + g0 q
        deff = delta + g0 * q
        out[off + 0] = -params.kappa * re_a - deff * im_a + e
        out[off + 1] = -params.kappa * im_a + deff * re_a
        out[off + 2] = om * p
        out[off + 3] = -om * q - gm * p + j * y[other_q] + g0 * (re_a ** 2 + im_a ** 2)
    return out


def rhs(state: ClassicalState, params: SystemParams) -> ClassicalState:
    """Mean-field time derivative at a state (dataclass API)."""
    return ClassicalState.from_array(rhs_array(state.to_array(), params))


def integrate(
    params: SystemParams,
    t_end: float,
    dt_out: float,
    init: Optional[ClassicalState] = None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> ClassicalTrajectory:
    """Integrate the mean-field equations from t = 0 to ``t_end``.

    Zero initial conditions by default.  Sampling happens on the uniform
    ``dt_out`` grid by shortening integrator steps to land on it exactly.
    When any state magnitude passes ``DIVERGENCE_CAP`` the trajectory halts
    and is reported with a divergent status rather than raising.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_out <= 0:
        raise ValueError("dt_out must be positive")
    y0 = (init or ZERO_STATE).to_array()
    t_out = _output_grid(t_end, dt_out)

    def f(t, y):
        return rhs_array(y, params)

    try:
        res = ode.integrate(
            f, (0.0, t_end), y0, t_out, rtol=rtol, atol=atol, max_abs=DIVERGENCE_CAP
        )
    except ode.StepSizeUnderflow as exc:
        raise IntegrationFailure(
            f"step size underflow at t={exc.t:g}", exc.t, exc.y
        ) from exc
    return ClassicalTrajectory(
        t=res.t, states=res.y, status=res.status,
        n_steps=res.n_steps, n_rejected=res.n_rejected,
    )


def _output_grid(t_end: float, dt_out: float) -> np.ndarray:
    n = int(np.floor(t_end / dt_out + 1e-9))
    grid = dt_out * np.arange(n + 1)
    if grid[-1] < t_end - 1e-9 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    else:
        grid[-1] = min(grid[-1], t_end)
    return grid


def mean_phase(state: ClassicalState, j: int) -> float:
    """Mean mechanical phase arctan(<p_j>/<q_j>), two-argument, in [0, 2pi)."""
    if j not in (1, 2):
        raise ValueError(f"oscillator index must be 1 or 2, got {j}")
    q, p = (state.q1, state.p1) if j == 1 else (state.q2, state.p2)
    return phase_from_qp(q, p)


def phase_from_qp(q: float, p: float) -> float:
    if abs(q) < 1e-15 and abs(p) < 1e-15:
        return 0.0
    return float(np.arctan2(p, q)) % (2.0 * np.pi)


def _half_peak_to_peak(x: np.ndarray) -> float:
    return 0.5 * float(x.max() - x.min())


def _window_amplitudes(t: np.ndarray, x: np.ndarray, sub: float):
    """Half peak-to-peak excursion of x over consecutive windows of length
    ``sub``.  Peak-to-peak removes the static offset (the radiation-pressure
    displaced fixed point), leaving the oscillation envelope."""
    n_sub = max(int(np.floor((t[-1] - t[0]) / sub)), 1)
    centers = np.empty(n_sub)
    peaks = np.empty(n_sub)
    for k in range(n_sub):
        lo = t[0] + k * sub
        m = (t >= lo) & (t < lo + sub)
        centers[k] = lo + 0.5 * sub
        peaks[k] = _half_peak_to_peak(x[m]) if m.any() else 0.0
    return centers, peaks


def classify(traj: ClassicalTrajectory, window: float) -> RegimeReport:
    """Classify the long-time regime of a trajectory.

    Over the two trailing windows the half peak-to-peak excursion A_j of each
    mechanical position is compared: a stationary (within 2%) excursion above
    the amplitude floor is a limit cycle.  Otherwise the oscillation envelope
    (per-window half peak-to-peak amplitudes, window length ``window/2`` so
    beat crests are sampled at least once per window) is fitted log-linearly;
    a decreasing fit with R^2 > 0.9 is a decaying regime with the fitted
    rate.  Bounded trajectories that are neither stationary nor decaying --
    the growth band between the instability threshold and limit-cycle
    saturation -- are reported as amplifying.
    """
    if traj.diverged:
        return RegimeReport(REGIME_DIVERGENT, np.nan, np.nan)
    t = traj.t
    span = t[-1] - t[0]
    if span < 3.0 * window:
        raise ValueError(f"trajectory span {span:g} is shorter than 3*window")

    qs = (traj.states[:, Q1], traj.states[:, Q2])
    m_last = t >= t[-1] - window
    m_prev = (t >= t[-1] - 2 * window) & (t < t[-1] - window)
    a_last = np.array([_half_peak_to_peak(q[m_last]) for q in qs])
    a_prev = np.array([_half_peak_to_peak(q[m_prev]) for q in qs])

    active = a_last > AMPLITUDE_FLOOR
    if active.any():
        variation = np.abs(a_last - a_prev) / np.where(a_last > 0, a_last, 1.0)
        if np.all(variation[active] < STATIONARITY_TOL):
            phase_diff = _locked_phase(traj, window)
            return RegimeReport(
                REGIME_LIMIT_CYCLE, a_last[0], a_last[1], locked_phase=phase_diff
            )

    # Envelope of the overall mechanical oscillation: per-window amplitudes
    # of each oscillator, combined as the larger of the two.
    sub = window / 2.0
    centers, peaks1 = _window_amplitudes(t, qs[0], sub)
    _, peaks2 = _window_amplitudes(t, qs[1], sub)
    peaks = np.maximum(peaks1, peaks2)
    if peaks.max() <= AMPLITUDE_FLOOR:
        return RegimeReport(REGIME_DECAYING, a_last[0], a_last[1], decay_rate=0.0)
    # Decay starts at the envelope peak; fitting from there keeps the
    # switch-on ramp out of the slope.  Growing envelopes peak at the end
    # and leave too few points to fit, falling through to amplifying.
    # Near the instability threshold the envelope has two exponential
    # segments (fast hybrid transient, then the slow asymptotic mode), so a
    # tail-only fit decides the regime when the full fit bends; the reported
    # rate comes from whichever fit qualified, the full one preferred.
    start = int(np.argmax(peaks))
    centers = centers[start:]
    peaks = peaks[start:]
    full = _log_linear_fit(centers, peaks)
    n_tail = len(peaks) - max(1, len(peaks) // 4)
    tail = _log_linear_fit(centers[-n_tail:], peaks[-n_tail:])
    for slope, r2 in (full, tail):
        if slope is not None and slope < 0 and r2 > 0.9:
            return RegimeReport(
                REGIME_DECAYING, a_last[0], a_last[1], decay_rate=-float(slope)
            )
    return RegimeReport(REGIME_AMPLIFYING, a_last[0], a_last[1])


def _log_linear_fit(x: np.ndarray, amps: np.ndarray):
    """Least-squares slope and R^2 of log(amps) against x; (None, 0) when
    fewer than three positive amplitudes."""
    good = amps > 0
    if good.sum() < 3:
        return None, 0.0
    xg = x[good]
    yl = np.log(amps[good])
    slope, _ = np.polyfit(xg, yl, 1)
    resid = yl - np.polyval(np.polyfit(xg, yl, 1), xg)
    ss_tot = float(np.sum((yl - yl.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), r2


def _locked_phase(traj: ClassicalTrajectory, window: float) -> float:
    """Circular mean of the mean-phase difference over the trailing window."""
    m = traj.t >= traj.t[-1] - window
    s = traj.states[m]
    ph1 = np.arctan2(s[:, P1], s[:, Q1])
    ph2 = np.arctan2(s[:, P2], s[:, Q2])
    z = np.exp(1j * (ph1 - ph2))
    return float(np.angle(z.mean())) % (2.0 * np.pi)


@dataclass
class ScanPoint:
    drive: float
    report: Optional[RegimeReport]     # None when the integration failed
    error: Optional[str] = None


@dataclass
class AmplitudeScan:
    points: list
    e_p: Optional[float]       # smallest drive not classified decaying
    e_lc: Optional[float]      # smallest drive classified limit_cycle


def _scan_one(args):
    params, drive, t_end, dt_out, window, rtol, atol = args
    p = params.replace(drive=drive)
    try:
        traj = integrate(p, t_end, dt_out, rtol=rtol, atol=atol)
        return ScanPoint(drive, classify(traj, window))
    except IntegrationFailure as exc:
        return ScanPoint(drive, None, error=str(exc))


def amplitude_scan(
    params: SystemParams,
    drives,
    t_end: float = 5000.0,
    window: float = 500.0,
    dt_out: float = 0.4,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    workers: Optional[int] = None,
) -> AmplitudeScan:
    """Classify the regime at each drive and locate the transition drives.

    The drives must be ascending.  Points integrate independently (in
    parallel when ``workers`` allows); per-point failures are recorded
    without aborting the scan.  ``e_p`` is the smallest drive whose regime is
    not decaying, ``e_lc`` the smallest classified as a limit cycle; either
    is None when the scan contains no such point.
    """
    drives = [float(d) for d in drives]
    if not drives:
        raise ValueError("drives must be non-empty")
    if any(b <= a for a, b in zip(drives, drives[1:])):
        raise ValueError("drives must be strictly ascending")

    from .parallel import parallel_map  # local import to avoid cycle at import time

    jobs = [(params, d, t_end, dt_out, window, rtol, atol) for d in drives]
    points = parallel_map(_scan_one, jobs, workers=workers)

    e_p = next(
        (pt.drive for pt in points
         if pt.report is not None and pt.report.regime != REGIME_DECAYING),
        None,
    )
    e_lc = next(
        (pt.drive for pt in points
         if pt.report is not None and pt.report.regime == REGIME_LIMIT_CYCLE),
        None,
    )
    return AmplitudeScan(points=points, e_p=e_p, e_lc=e_lc)


def fixed_point(params: SystemParams, q_init=(0.0, 0.0), max_iter: int = 200):
    """Algebraic steady state of the mean-field equations by damped Newton.

    Reduces to the two mechanical positions: q solves K q = g0 |a(q)|^2 with
    K = [[w1, -J], [-J, w2]] and a_j(q_j) = E / (kappa - i(Delta_j + g0 q_j)).
    Returns the full :class:`ClassicalState`.  Warm-start ``q_init`` supports
    continuation along a drive scan.
    """
    e = params.drive
    g0 = params.g0
    kap = params.kappa
    deltas = np.array([params.delta1, params.delta2])
    omegas = np.array([params.omega_m1, params.omega_m2])
    kmat = np.array([[omegas[0], -params.j_coupling],
                     [-params.j_coupling, omegas[1]]])
    q = np.array(q_init, dtype=float)

    def residual(qv):
        deff = deltas + g0 * qv
        amps2 = e ** 2 / (kap ** 2 + deff ** 2)
        return kmat @ qv - g0 * amps2, deff, amps2

    f_val, deff, amps2 = residual(q)
    for _ in range(max_iter):
        if np.max(np.abs(f_val)) < 1e-13 * max(1.0, float(np.max(np.abs(q)))):
            break
        d_amps2 = -e ** 2 * 2.0 * deff * g0 / (kap ** 2 + deff ** 2) ** 2
        jac = kmat - np.diag(g0 * d_amps2)
        step = np.linalg.solve(jac, f_val)
        # Backtracking keeps the iteration inside the basin at high drive.
        lam = 1.0
        for _ in range(30):
            trial = q - lam * step
            f_new, deff_new, amps2_new = residual(trial)
            if np.max(np.abs(f_new)) < np.max(np.abs(f_val)):
                q, f_val, deff, amps2 = trial, f_new, deff_new, amps2_new
                break
            lam *= 0.5
        else:
            raise RuntimeError(
                f"fixed-point Newton stalled at drive={e:g}, |F|={np.max(np.abs(f_val)):.2e}"
            )
    else:
        raise RuntimeError(f"fixed-point Newton did not converge at drive={e:g}")

    a = e / (kap - 1j * deff)
    return ClassicalState(
        re_a1=float(a[0].real), im_a1=float(a[0].imag), q1=float(q[0]), p1=0.0,
        re_a2=float(a[1].real), im_a2=float(a[1].imag), q2=float(q[1]), p2=0.0,
    )


def trailing_field_average(traj: ClassicalTrajectory, window: float):
    """Time-averaged |<a_j>| over the trailing window of a trajectory."""
    m = traj.t >= traj.t[-1] - window
    s = traj.states[m]
    a1 = np.hypot(s[:, RE_A1], s[:, IM_A1]).mean()
    a2 = np.hypot(s[:, RE_A2], s[:, IM_A2]).mean()
    return float(a1), float(a2)
