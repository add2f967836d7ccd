"""Adaptive Dormand-Prince 4(5) integration.

The embedded 5(4) pair with FSAL re-use, PI-free step control and exact
landing on requested output times.  Landing on the output grid (instead of
interpolating dense output) keeps the sample sequence bit-deterministic for
identical inputs, which the experiment layer relies on for reproducible CSV
bytes.

The integrator reports accepted and rejected step counts, halts with a
``divergent`` status when the state magnitude passes a configurable cap, and
raises :class:`StepSizeUnderflow` (carrying the last good time and state)
when error control pushes the step below machine resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Dormand-Prince 5(4) tableau (Hairer-Norsett-Wanner).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXP = -1.0 / 5.0

STATUS_DONE = "done"
STATUS_DIVERGENT = "divergent"


class StepSizeUnderflow(RuntimeError):
    """Step size collapsed below machine resolution.

    Attributes ``t`` and ``y`` hold the last accepted time and state.
    """

    def __init__(self, t, y):
        super().__init__(f"step size underflow at t={t:g}")
        self.t = t
        self.y = np.array(y)


@dataclass
class IntegrationResult:
    t: np.ndarray          # output times actually reached
    y: np.ndarray          # states at those times, shape (len(t), n)
    status: str            # STATUS_DONE or STATUS_DIVERGENT
    t_final: float         # last accepted time
    y_final: np.ndarray    # last accepted state
    n_steps: int           # accepted steps
    n_rejected: int        # rejected step attempts


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, t_bound):
    # Hairer's starting-step heuristic, clipped to the integration span.
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, abs(t_bound - t0))


def integrate(f, t_span, y0, t_out, rtol=1e-9, atol=1e-12, max_abs=None):
    """Integrate ``dy/dt = f(t, y)`` over ``t_span``, sampling at ``t_out``.

    Args:
        f: right-hand side callable ``f(t, y) -> dy``.
        t_span: (t0, t_end) with t_end > t0.
        y0: initial state (1-D array-like).
        t_out: strictly increasing output times; the first must equal t0 and
            the last must equal t_end.  Steps are shortened to land on each.
        rtol, atol: per-step error control tolerances.
        max_abs: divergence cap; exceeding it halts with a divergent status.

    Raises:
        StepSizeUnderflow: when the error controller cannot make progress.
    """
    t0, t_end = float(t_span[0]), float(t_span[1])
    if t_end <= t0:
        raise ValueError(f"t_end must exceed t0, got span ({t0}, {t_end})")
    y = np.array(y0, dtype=float)
    t_out = np.asarray(t_out, dtype=float)
    if t_out.ndim != 1 or len(t_out) == 0:
        raise ValueError("t_out must be a non-empty 1-D array")
    if abs(t_out[0] - t0) > 1e-12 * max(1.0, abs(t0)):
        raise ValueError("first output time must equal t0")
    if np.any(np.diff(t_out) <= 0):
        raise ValueError("t_out must be strictly increasing")

    n = y.size
    ys = np.empty((len(t_out), n))
    ys[0] = y
    next_out = 1

    t = t0
    k = np.empty((7, n))
    k[0] = f(t, y)
    h = _initial_step(f, t, y, k[0], rtol, atol, t_end)
    tiny = 16.0 * np.finfo(float).eps

    n_steps = 0
    n_rejected = 0
    status = STATUS_DONE

    while t < t_end:
        if h < tiny * max(1.0, abs(t)):
            raise StepSizeUnderflow(t, y)
        target = t_out[next_out] if next_out < len(t_out) else t_end
        clipped = False
        h_try = h
        if t + h_try >= target:
            h_try = target - t
            clipped = True

        for i in range(1, 7):
            yi = y + h_try * (k[:i].T @ _A[i])
            k[i] = f(t + _C[i] * h_try, yi)
        y_new = y + h_try * (k.T @ _B5)
        err = h_try * (k.T @ _E)
        norm = _error_norm(err, y, y_new, rtol, atol)

        if norm <= 1.0:
            t = target if clipped else t + h_try
            y = y_new
            k[0] = k[6]  # FSAL
            n_steps += 1
            while next_out < len(t_out) and abs(t - t_out[next_out]) <= tiny * max(1.0, abs(t)):
                ys[next_out] = y
                next_out += 1
            factor = _MAX_FACTOR if norm == 0.0 else min(
                _MAX_FACTOR, _SAFETY * norm ** _ORDER_EXP
            )
            # A step shortened to land on an output time must not shrink the
            # working step for the steps that follow.
            h = max(h, h_try * factor) if clipped else h_try * factor
            if max_abs is not None and np.max(np.abs(y)) > max_abs:
                status = STATUS_DIVERGENT
                break
        else:
            n_rejected += 1
            h = h_try * max(_MIN_FACTOR, _SAFETY * norm ** _ORDER_EXP)

    return IntegrationResult(
        t=t_out[:next_out].copy(),
        y=ys[:next_out],
        status=status,
        t_final=t,
        y_final=y.copy(),
        n_steps=n_steps,
        n_rejected=n_rejected,
    )
