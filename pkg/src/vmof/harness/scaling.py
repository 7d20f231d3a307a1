"""Wall time of one VMOF iteration as the dimension grows."""

from __future__ import annotations

import time

import numpy as np

from vmof.benchmarks import make_sp1
from vmof.framework import VmofConfig, vmof_run

DEFAULT_DIMS = (1_000, 10_000, 100_000, 1_000_000)


def time_one_iteration(d: int, population_size: int = 20, phase_budget: int = 100, seed: int = 0, repeats: int = 1) -> tuple[float, int]:
    """Best-of-``repeats`` seconds for initialisation plus one full iteration, and the evaluations used."""
    E = population_size + 3 * phase_budget
    problem = make_sp1(d)
    cfg = VmofConfig(
        population_size=population_size,
        n_d=max(1, population_size // 4),
        total_budget=E,
        phase_fraction=phase_budget / E,
        seed=seed,
    )
    best = np.inf
    evals = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = vmof_run(problem, cfg)
        best = min(best, time.perf_counter() - t0)
        evals = res.evaluations
    return best, evals


def bench_scaling(dims=DEFAULT_DIMS, repeats: int = 1, **kw) -> list[tuple[int, float, int]]:
    """(d, seconds, evaluations) per dimension."""
    return [(d, *time_one_iteration(d, repeats=repeats, **kw)) for d in dims]


def loglog_slope(dims, seconds) -> float:
    """Least-squares slope of log(seconds) against log(d)."""
    return float(np.polyfit(np.log(np.asarray(dims, float)), np.log(np.asarray(seconds, float)), 1)[0])
