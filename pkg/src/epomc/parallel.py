"""Process-level fan-out for independent sweep points and scenarios.

Workers default to the CPU count, capped by the ``EPOMC_WORKERS`` environment
variable.  Results always come back in input order, so parallel execution
cannot change any output ordering.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

WORKERS_ENV = "EPOMC_WORKERS"


def worker_count(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, jobs, workers=None) -> list:
    """Map ``fn`` over ``jobs`` preserving order; sequential for 1 worker."""
    jobs = list(jobs)
    n = worker_count(workers)
    if n == 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
        return list(pool.map(fn, jobs))
