"""Reference algorithms run under the same evaluation budget as VMOF."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vmof import kernels
from vmof.benchmarks import hv_reference_point, sample_reference_front
from vmof.core import EvalBudget, Population, Problem, evaluate_batch, evaluate_population, random_population
from vmof.errors import ConfigInvalid
from vmof.framework import ObjectiveTrace
from vmof.optimizer import VariationParams, nsga2_generation


@dataclass
class BaselineResult:
    F: np.ndarray
    evaluations: int
    checkpoints: list = field(default_factory=list)
    history: list = field(default_factory=list)


def _trace_for(problem: Problem, budget: EvalBudget, checkpoint_every: int | None) -> ObjectiveTrace:
    front = ref = None
    if problem.pf_sampler is not None:
        front = sample_reference_front(problem)
        ref = hv_reference_point(problem)
    trace = ObjectiveTrace(front, ref, checkpoint_every)
    budget.subscribe(trace)
    return trace


def nsga2_run(
    problem: Problem,
    population_size: int,
    total_budget: int,
    seed: int,
    params: VariationParams | None = None,
    checkpoint_every: int | None = None,
) -> BaselineResult:
    """Plain NSGA-II until the budget is spent; returns the final population's objectives."""
    if total_budget < population_size:
        raise ConfigInvalid("budget smaller than the population")
    params = params or VariationParams()
    budget = EvalBudget(total_budget)
    trace = _trace_for(problem, budget, checkpoint_every)
    rng = np.random.default_rng(seed)
    pop = evaluate_population(problem, random_population(problem, population_size, rng).X, budget)
    evaluate = lambda X: evaluate_batch(problem, X, budget)  # noqa: E731
    while budget.remaining > 0:
        used = budget.consumed
        pop = nsga2_generation(pop, params, problem.lower, problem.upper, evaluate, rng)
        if budget.consumed == used:
            break  # variation switched off: offspring are all clones
    return BaselineResult(pop.F, budget.consumed, trace.checkpoints)


def random_search(
    problem: Problem,
    total_budget: int,
    seed: int,
    chunk: int = 1000,
    checkpoint_every: int | None = None,
) -> BaselineResult:
    """Uniform samples from the box; returns the non-dominated subset of all of them.

    Samples are drawn as successive ``rng.random((k, d))`` blocks scaled to
    the bounds, so the stream equals one ``(total_budget, d)`` draw.
    """
    budget = EvalBudget(total_budget)
    trace = _trace_for(problem, budget, checkpoint_every)
    rng = np.random.default_rng(seed)
    best = np.empty((0, problem.n_obj))
    while budget.remaining > 0:
        k = min(chunk, budget.remaining)
        pop = random_population(problem, k, rng)
        F, _ = evaluate_batch(problem, pop.X, budget)
        both = np.concatenate((best, F))
        best = both[kernels.nondominated_mask(both)]
    return BaselineResult(best, budget.consumed, trace.checkpoints)
