"""NSGA-II generation operator and the direction-driven particle swarm.

``nsga2_generation`` is generic over what a row of the population means: in
the solution phases rows are decision vectors, in direction fine-tuning they
are displacements whose fitness is the objective vector they produce from a
representative solution. The caller supplies the bounds and an ``evaluate``
callable that charges the budget.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from vmof.core import EvalBudget, Population, Problem, clamp_to_bounds, evaluate_batch
from vmof.dominance import nondominated_unique, rank_and_crowding, select_indices
from vmof.errors import BudgetExhausted
from vmof import kernels

EvaluateRows = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class VariationParams:
    """SBX and polynomial mutation settings.

    ``mutation_prob=None`` means one over the number of variables.
    """

    crossover_prob: float = 1.0
    crossover_index: float = 20.0
    mutation_prob: float | None = None
    mutation_index: float = 20.0

    def __post_init__(self) -> None:
        for p in (self.crossover_prob, self.mutation_prob):
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.crossover_index <= 0 or self.mutation_index <= 0:
            raise ValueError("distribution indices must be positive")


@dataclass(frozen=True)
class PsoParams:
    w: float = 0.4
    c1: float = 2.0
    c2: float = 2.0


def sbx_crossover(P1, P2, params: VariationParams, lower, upper, rng: np.random.Generator):
    """Bounded simulated binary crossover on row-paired parents.

    Each pair crosses with ``crossover_prob``; inside a crossing pair every
    variable is recombined with probability 1/2 and the two children swap
    that variable with probability 1/2.
    """
    C1 = np.array(P1, dtype=np.float64)
    C2 = np.array(P2, dtype=np.float64)
    n, d = C1.shape
    if n == 0:
        return C1, C2
    eta = params.crossover_index
    pair_on = rng.random(n) < params.crossover_prob
    rows = np.flatnonzero(pair_on)
    if rows.size == 0:
        return C1, C2
    idx = np.flatnonzero(rng.random(rows.size * d) < 0.5)
    if rows.size < n:
        idx = rows[idx // d] * d + idx % d
    flat1 = C1.reshape(-1)
    flat2 = C2.reshape(-1)
    a = flat1[idx]
    b = flat2[idx]
    keep = np.abs(a - b) > 1e-14
    idx, a, b = idx[keep], a[keep], b[keep]
    if idx.size == 0:
        return C1, C2
    u = rng.random(idx.size)
    swap = rng.random(idx.size) < 0.5
    cols = idx % d
    lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (d,))[cols]
    hi = np.broadcast_to(np.asarray(upper, dtype=np.float64), (d,))[cols]
    np.clip(a, lo, hi, out=a)
    np.clip(b, lo, hi, out=b)
    y1 = np.minimum(a, b)
    y2 = np.maximum(a, b)
    # clipping can collapse a pair onto one value
    gap = np.maximum(y2 - y1, 1e-14)
    inv = 1.0 / (eta + 1.0)

    def spread(beta):
        alpha = 2.0 - beta ** -(eta + 1.0)
        ua = u * alpha
        base = np.where(u <= 1.0 / alpha, ua, 1.0 / (2.0 - ua))
        return base**inv

    mid = y1 + y2
    c1 = 0.5 * (mid - spread(1.0 + 2.0 * (y1 - lo) / gap) * gap)
    c2 = 0.5 * (mid + spread(1.0 + 2.0 * (hi - y2) / gap) * gap)
    np.clip(c1, lo, hi, out=c1)
    np.clip(c2, lo, hi, out=c2)
    flat1[idx] = np.where(swap, c2, c1)
    flat2[idx] = np.where(swap, c1, c2)
    return C1, C2


def polynomial_mutation(X, params: VariationParams, lower, upper, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation, applied in place on a copy of ``X``."""
    Y = np.array(X, dtype=np.float64)
    n, d = Y.shape
    pm = params.mutation_prob if params.mutation_prob is not None else 1.0 / d
    if n == 0 or pm <= 0.0:
        return Y
    idx = np.flatnonzero(rng.random(n * d) < pm)
    if idx.size == 0:
        return Y
    flat = Y.reshape(-1)
    cols = idx % d
    lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (d,))[cols]
    hi = np.broadcast_to(np.asarray(upper, dtype=np.float64), (d,))[cols]
    y = np.clip(flat[idx], lo, hi)
    width = hi - lo
    ok = width > 0
    safe = np.where(ok, width, 1.0)
    d1 = (y - lo) / safe
    d2 = (hi - y) / safe
    u = rng.random(idx.size)
    eta = params.mutation_index
    low_side = u < 0.5
    p = np.where(low_side, 1.0 - d1, 1.0 - d2) ** (eta + 1.0)
    val = np.where(low_side, 2.0 * u + (1.0 - 2.0 * u) * p, 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * p)
    q = val ** (1.0 / (eta + 1.0))
    dq = np.where(low_side, q - 1.0, 1.0 - q)
    y = np.clip(y + dq * width, lo, hi)
    flat[idx] = np.where(ok, y, flat[idx])
    return Y


def binary_tournament(rank, crowd, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` winners of random pairwise contests on (rank, crowding, index)."""
    n = len(rank)
    a = rng.integers(0, n, k)
    b = rng.integers(0, n, k)
    a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & ((crowd[a] > crowd[b]) | ((crowd[a] == crowd[b]) & (a <= b))))
    return np.where(a_wins, a, b)


def make_offspring(pop: Population, params: VariationParams, lower, upper, rng) -> np.ndarray:
    """Tournament, SBX and mutation; exact clones of a parent are dropped."""
    n = len(pop)
    rank, crowd = rank_and_crowding(pop.F)
    n_pairs = (n + 1) // 2
    parents = binary_tournament(rank, crowd, 2 * n_pairs, rng)
    pa, pb = parents[0::2], parents[1::2]
    C1, C2 = sbx_crossover(pop.X[pa], pop.X[pb], params, lower, upper, rng)
    kids = np.empty((2 * n_pairs, pop.X.shape[1]))
    kids[0::2] = C1
    kids[1::2] = C2
    kids = polynomial_mutation(kids[:n], params, lower, upper, rng)
    src_a = np.repeat(pa, 2)[:n]
    src_b = np.repeat(pb, 2)[:n]
    clone = np.all(kids == pop.X[src_a], axis=1) | np.all(kids == pop.X[src_b], axis=1)
    return kids[~clone]


def nsga2_generation(
    pop: Population,
    params: VariationParams,
    lower,
    upper,
    evaluate: EvaluateRows,
    rng: np.random.Generator,
) -> Population:
    """One NSGA-II generation: offspring, evaluation, elitist truncation.

    If the budget runs out part way, selection runs over the parents plus
    whatever offspring were evaluated.
    """
    n = len(pop)
    kids = make_offspring(pop, params, lower, upper, rng)
    if len(kids) == 0:
        return pop
    try:
        F, ids = evaluate(kids)
    except BudgetExhausted:
        return pop
    merged = Population(
        np.concatenate((pop.X, kids[: len(F)])),
        np.concatenate((pop.F, F)),
        np.concatenate((pop.ids, ids)),
    )
    return merged.take(select_indices(merged.F, n))


class NSGA2Operator:
    """The inner optimizer applied to groups of solutions or directions."""

    def __init__(self, params: VariationParams | None = None):
        self.params = params or VariationParams()

    def __call__(self, pop, lower, upper, evaluate: EvaluateRows, rng) -> Population:
        return nsga2_generation(pop, self.params, lower, upper, evaluate, rng)


# ---------------------------------------------------------------- swarm


@dataclass
class SwarmState:
    positions: Population
    velocities: np.ndarray
    pbest: Population
    archive: Population


def update_archive(archive: Population, new: Population, size: int) -> Population:
    """Merge, keep the non-dominated (first copy of duplicates), cut to ``size`` by crowding."""
    merged = Population.concat([archive, new]) if len(archive) else new
    keep = nondominated_unique(merged.F)
    merged = merged.take(keep)
    if len(merged) > size:
        crowd = kernels.crowding_distance(merged.F)
        order = np.lexsort((np.arange(len(merged)), -crowd))
        merged = merged.take(np.sort(order[:size]))
    return merged


def init_swarm(positions: Population, velocities: np.ndarray, archive_size: int | None = None) -> SwarmState:
    size = archive_size or len(positions)
    archive = update_archive(Population.empty(positions.X.shape[1], positions.F.shape[1]), positions, size)
    pbest = Population(positions.X.copy(), positions.F.copy(), positions.ids.copy())
    return SwarmState(positions, np.array(velocities, dtype=np.float64), pbest, archive)


def directed_pso(
    state: SwarmState,
    phase_budget: int,
    params: PsoParams,
    problem: Problem,
    budget: EvalBudget,
    rng: np.random.Generator,
    archive_size: int | None = None,
) -> SwarmState:
    """Run swarm sweeps until ``phase_budget`` evaluations are spent.

    Each sweep updates every particle against the archive as it stood at the
    start of the sweep::

        v <- w v + c1 r1 (pbest - x) + c2 r2 (guide - x)
        x <- clamp(x + v)

    with scalar ``r1, r2`` per particle and the guide drawn uniformly from
    the archive. The returned velocities are the directions handed to the
    next iteration.
    """
    size = archive_size or len(state.positions)
    X = state.positions.X.copy()
    F = state.positions.F.copy()
    ids = state.positions.ids.copy()
    V = state.velocities.copy()
    PX, PF, Pids = state.pbest.X.copy(), state.pbest.F.copy(), state.pbest.ids.copy()
    archive = state.archive
    n = len(X)
    spent = 0
    step = np.empty_like(X)
    while spent < phase_budget and budget.remaining > 0:
        r1 = rng.random(n)[:, None]
        r2 = rng.random(n)[:, None]
        guides = rng.integers(0, len(archive), n)
        coin = rng.random(n)
        V *= params.w
        np.subtract(PX, X, out=step)
        step *= params.c1 * r1
        V += step
        np.subtract(archive.X[guides], X, out=step)
        step *= params.c2 * r2
        V += step
        np.add(X, V, out=step)
        clamp_to_bounds(step, problem, out=step)
        try:
            Fn, idn = evaluate_batch(problem, step, budget)
        except BudgetExhausted:
            break
        # past a truncation point particles keep their position, not their move
        k = len(Fn)
        X[:k] = step[:k]
        F[:k] = Fn
        ids[:k] = idn
        spent += k
        new_dom = np.all(Fn <= PF[:k], axis=1) & np.any(Fn < PF[:k], axis=1)
        old_dom = np.all(PF[:k] <= Fn, axis=1) & np.any(PF[:k] < Fn, axis=1)
        replace = new_dom | (~old_dom & (coin[:k] < 0.5))
        PX[:k][replace] = X[:k][replace]
        PF[:k][replace] = Fn[replace]
        Pids[:k][replace] = idn[replace]
        archive = update_archive(archive, Population(X[:k], Fn, idn), size)
    return SwarmState(Population(X, F, ids), V, Population(PX, PF, Pids), archive)

