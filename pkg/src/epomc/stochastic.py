"""Monte-Carlo integrator for the linear fluctuation Langevin equation.

Test support only: an Euler-Maruyama ensemble of du = A u dt + dW with
white-noise intensity <dW dW^T> = N dt cross-validates the Lyapunov
covariance propagation (that intensity makes the stationary ensemble
covariance solve A V + V A^T + N = 0, which the test-suite asserts rather
than assumes).  Not part of the simulation path, so clarity beats speed.

Randomness is counter-based and splittable: trajectories are processed in
fixed-size chunks, each chunk drawing from its own Philox stream keyed by
(seed, chunk index).  Results are therefore bit-reproducible regardless of
how chunks would be scheduled, and independent of the ensemble's chunk
processing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import classical, fluctuations
from .model import SystemParams

#: Trajectories per random stream; fixed so that seeding is layout-stable.
CHUNK_SIZE = 2048

#: Any |u| beyond this flags a runaway trajectory (unstable drift).
TRAJECTORY_CAP = 1e9


class EnsembleDivergence(RuntimeError):
    """A trajectory exceeded the runaway cap (drift matrix unstable)."""


@dataclass(frozen=True)
class EnsembleSpec:
    n_trajectories: int
    dt: float
    seed: int
    frozen_drift: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if not 0 < self.dt:
            raise ValueError("dt must be positive")


@dataclass
class EnsembleSample:
    t: float
    covariance: np.ndarray       # 8x8 unbiased sample covariance
    standard_error: np.ndarray   # 8x8 jackknife standard errors
    mean: np.ndarray             # ensemble mean state (should stay near 0)
    mean_se: np.ndarray          # standard error of the mean


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(chunk_index),))
    return np.random.Generator(np.random.Philox(ss))


def ensemble_covariance(spec: EnsembleSpec, params: SystemParams, t_samples,
                        v0="vacuum"):
    """Sample covariances of the Euler-Maruyama ensemble at given times.

    The drift is ``spec.frozen_drift`` when provided, otherwise the drift
    matrix frozen at the classical fixed point of ``params``.  Sample times
    snap to the step grid (they must sit within half a step of a multiple of
    ``dt``).  Returns one :class:`EnsembleSample` per requested time, in
    order.

    Initial states draw from N(0, V0): ``v0="vacuum"`` (I/2, matching the
    default of the Lyapunov propagator) or ``v0=None`` for the deterministic
    zero start.  Covariances are the unbiased (n-1) estimator around the
    ensemble mean; the per-element standard errors come from a
    leave-one-trajectory-out jackknife.
    """
    t_samples = [float(t) for t in t_samples]
    if not t_samples or any(b <= a for a, b in zip(t_samples, t_samples[1:])):
        raise ValueError("t_samples must be non-empty and strictly increasing")
    steps = []
    for t in t_samples:
        k = int(round(t / spec.dt))
        if abs(k * spec.dt - t) > 0.5 * spec.dt * 1e-6:
            raise ValueError(f"sample time {t:g} is not a multiple of dt={spec.dt:g}")
        steps.append(k)

    if spec.frozen_drift is not None:
        a = np.asarray(spec.frozen_drift, dtype=float)
        if a.shape != (8, 8):
            raise ValueError(f"frozen_drift must be 8x8, got {a.shape}")
    else:
        a = fluctuations.drift_matrix(classical.fixed_point(params), params)
    noise_sd = np.sqrt(np.diag(fluctuations.noise_matrix(params)) * spec.dt)
    a_dt_t = (a * spec.dt).T

    n_total = spec.n_trajectories
    n_chunks = (n_total + CHUNK_SIZE - 1) // CHUNK_SIZE

    # Accumulate ensemble states at each sample time, chunk by chunk.
    collected = [np.empty((n_total, 8)) for _ in steps]
    if v0 == "vacuum":
        init_sd = np.full(8, np.sqrt(0.5))
    elif v0 is None:
        init_sd = None
    else:
        raise ValueError("v0 must be 'vacuum' or None")

    for chunk in range(n_chunks):
        lo = chunk * CHUNK_SIZE
        hi = min(lo + CHUNK_SIZE, n_total)
        m = hi - lo
        rng = _chunk_rng(spec.seed, chunk)
        # Draw full chunk-width blocks so the stream layout does not depend
        # on how many trajectories the last chunk holds.
        xi = np.empty((CHUNK_SIZE, 8))
        if init_sd is not None:
            rng.standard_normal(out=xi)
            u = xi[:m] * init_sd
        else:
            u = np.zeros((m, 8))
        drift_buf = np.empty_like(u)
        step = 0
        for target, out in zip(steps, collected):
            while step < target:
                rng.standard_normal(out=xi)
                np.matmul(u, a_dt_t, out=drift_buf)
                u += drift_buf
                drift_buf[:] = xi[:m]
                drift_buf *= noise_sd
                u += drift_buf
                step += 1
                if step % 256 == 0 and np.abs(u).max() > TRAJECTORY_CAP:
                    raise EnsembleDivergence(
                        f"trajectory magnitude exceeded {TRAJECTORY_CAP:g} at "
                        f"step {step} (t={step * spec.dt:g})"
                    )
            out[lo:hi] = u

    samples = []
    for t, states in zip(t_samples, collected):
        samples.append(_covariance_sample(t, states))
    return samples


def _covariance_sample(t: float, states: np.ndarray) -> EnsembleSample:
    n = states.shape[0]
    mean = states.mean(axis=0)
    dev = states - mean
    if n > 1:
        cov = dev.T @ dev / (n - 1)
    else:
        cov = np.zeros((8, 8))

    # Jackknife over trajectories: recompute the (n-1)-trajectory covariance
    # with each trajectory left out, vectorized over the left-out index.
    if n > 2:
        s1 = states.sum(axis=0)
        outer = np.einsum("ki,kj->kij", states, states)
        s2 = outer.sum(axis=0)
        mean_loo = (s1[None, :] - states) / (n - 1)
        cov_loo = (
            s2[None, :, :] - outer
            - (n - 1) * np.einsum("ki,kj->kij", mean_loo, mean_loo)
        ) / (n - 2)
        cov_bar = cov_loo.mean(axis=0)
        se = np.sqrt((n - 1) / n * ((cov_loo - cov_bar) ** 2).sum(axis=0))
    else:
        se = np.full((8, 8), np.inf)
    mean_se = dev.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(8, np.inf)
    return EnsembleSample(
        t=t, covariance=cov, standard_error=se, mean=mean, mean_se=mean_se
    )
