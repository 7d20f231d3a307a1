"""Fine-tuning of recommended directions into one direction per solution.

For every (recommended direction, solution group) pair a small population of
directions is grown around the recommendation and evolved by the inner
optimizer. A direction's fitness is the objective vector of the solution it
produces from a representative of the group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vmof import kernels
from vmof.core import EvalBudget, Population, Problem, clamp_to_bounds, evaluate_batch
from vmof.dominance import rank_and_crowding, select_indices
from vmof.errors import BudgetExhausted
from vmof.optimizer import NSGA2Operator
from vmof.sampling import GroupedSets


@dataclass
class FinetuneConfig:
    representatives_per_group: int = 1
    sigma_frac: float = 0.05
    enabled: bool = True


def select_representatives(group: Population, k: int) -> Population:
    """Top ``k`` by front rank, then crowding distance (boundaries first), then index."""
    rank, crowd = rank_and_crowding(group.F)
    order = np.lexsort((np.arange(len(group)), -crowd, rank))
    return group.take(order[:k])


def init_direction_population(d_k, n_di: int, sigma_frac: float, problem: Problem, rng) -> np.ndarray:
    """``d_k`` itself followed by ``n_di - 1`` Gaussian perturbations of it.

    Perturbed members are kept inside ``[-range, +range]`` per coordinate.
    """
    d_k = np.asarray(d_k, dtype=np.float64)
    D = np.empty((n_di, len(d_k)))
    D[0] = d_k
    if n_di > 1:
        noise = rng.standard_normal((n_di - 1, len(d_k)))
        noise *= sigma_frac * problem.span
        D[1:] = noise
        D[1:] += d_k
        np.clip(D[1:], -problem.span, problem.span, out=D[1:])
    return D


class ProducedPool:
    """Solutions produced while fine-tuning, stored as (representative, direction).

    The decision vector of entry ``j`` is ``clamp(reps[rep[j]] + dirs[j])``,
    so only one array of length ``d`` per entry is kept.
    """

    def __init__(self, d: int, m: int):
        self.reps: list[np.ndarray] = []
        self._dirs: list[np.ndarray] = []
        self._F: list[np.ndarray] = []
        self._ids: list[np.ndarray] = []
        self._rep: list[np.ndarray] = []
        self.d, self.m = d, m

    def add_rep(self, x: np.ndarray) -> int:
        self.reps.append(np.asarray(x, dtype=np.float64))
        return len(self.reps) - 1

    def add(self, rep: int, dirs: np.ndarray, F: np.ndarray, ids: np.ndarray) -> None:
        if len(F):
            self._dirs.append(dirs[: len(F)])
            self._F.append(F)
            self._ids.append(ids)
            self._rep.append(np.full(len(F), rep, dtype=np.intp))

    def __len__(self) -> int:
        return sum(len(f) for f in self._F)

    def _stack(self):
        if not self._F:
            return np.empty((0, self.d)), np.empty((0, self.m)), np.empty(0, np.int64), np.empty(0, np.intp)
        if len(self._F) > 1:
            self._dirs = [np.concatenate(self._dirs)]
            self._F = [np.concatenate(self._F)]
            self._ids = [np.concatenate(self._ids)]
            self._rep = [np.concatenate(self._rep)]
        return self._dirs[0], self._F[0], self._ids[0], self._rep[0]

    @property
    def F(self) -> np.ndarray:
        return self._stack()[1]

    @property
    def directions(self) -> np.ndarray:
        return self._stack()[0]

    def prune(self, keep: int) -> None:
        """Drop entries dominated by at least ``keep`` others.

        Such entries can never survive a truncation to ``keep`` over any
        superset of the pool, so this leaves that truncation unchanged.
        """
        D, F, ids, rep = self._stack()
        if len(F) <= keep:
            return
        ok = kernels.dominator_counts(F) < keep
        self._dirs, self._F, self._ids, self._rep = [D[ok]], [F[ok]], [ids[ok]], [rep[ok]]

    def materialize(self, problem: Problem, idx=None) -> tuple[Population, np.ndarray]:
        """Solutions (and the directions that produced them) for entries ``idx``."""
        D, F, ids, rep = self._stack()
        if idx is not None:
            idx = np.asarray(idx, dtype=np.intp)
            D, F, ids, rep = D[idx], F[idx], ids[idx], rep[idx]
        X = np.empty_like(D)
        for j in range(len(D)):
            np.add(self.reps[rep[j]], D[j], out=X[j])
        clamp_to_bounds(X, problem, out=X)
        return Population(X, F, ids), D


@dataclass
class FinetuneResult:
    directions: np.ndarray
    pool: ProducedPool
    final_fitness: list[np.ndarray] = field(default_factory=list)
    evaluations: int = 0


def evolution_directions_finetuning(
    recommended: np.ndarray,
    groups: GroupedSets,
    phase_budget: int,
    inner: NSGA2Operator,
    problem: Problem,
    budget: EvalBudget,
    rng: np.random.Generator,
    config: FinetuneConfig | None = None,
    pool_keep: int | None = None,
) -> FinetuneResult:
    """Fine-tune every recommended direction against its group.

    Returns ``n_di`` directions per group, concatenated in group order, so
    row ``i*n_di + j`` belongs to solution ``j`` of group ``i``. When
    ``pool_keep`` is given the produced pool is pruned to entries that could
    still survive a truncation to that size.
    """
    cfg = config or FinetuneConfig()
    n_d = len(recommended)
    start = budget.consumed
    pool = ProducedPool(problem.dim, problem.n_obj)
    span = problem.span
    out = []
    fitness = []
    streams = rng.spawn(n_d)
    pair_budget = phase_budget // n_d
    for i in range(n_d):
        g_rng = streams[i]
        sols = groups.solutions[i]
        n_di = len(sols)
        n_rep = max(1, min(cfg.representatives_per_group, n_di))
        reps = select_representatives(sols, n_rep)
        rep_budget = pair_budget // n_rep
        finals = []
        for r in range(n_rep):
            s_d = reps.X[r]
            rid = pool.add_rep(s_d)
            rep_start = budget.consumed

            def evaluate(Dk, s_d=s_d, rid=rid):
                F, ids = evaluate_batch(problem, clamp_to_bounds(s_d + Dk, problem), budget)
                pool.add(rid, Dk, F, ids)
                return F, ids

            Dp = init_direction_population(recommended[i], n_di, cfg.sigma_frac, problem, g_rng)
            try:
                F, ids = evaluate(Dp)
            except BudgetExhausted:
                F, ids = np.empty((0, problem.n_obj)), np.empty(0, np.int64)
            dpop = Population(Dp[: len(F)], F, ids)
            unevaluated = Dp[len(F) :]
            while len(dpop) and budget.consumed - rep_start < rep_budget and budget.remaining > 0:
                used = budget.consumed
                dpop = inner(dpop, -span, span, evaluate, g_rng)
                if budget.consumed == used:
                    break  # every offspring was a clone, nothing can change
            finals.append((dpop, unevaluated))
        if n_rep == 1:
            dpop, unevaluated = finals[0]
            dirs = np.concatenate((dpop.X, unevaluated))
            fitness.append(dpop.F)
        else:
            union = Population.concat([f[0] for f in finals])
            pad = np.concatenate([f[1] for f in finals])
            take = select_indices(union.F, min(n_di, len(union)))
            dirs = np.concatenate((union.X[take], pad))[:n_di]
            fitness.append(union.F[take])
        out.append(dirs)
        if pool_keep is not None and len(pool) > 2 * pool_keep:
            pool.prune(pool_keep)
    if pool_keep is not None:
        pool.prune(pool_keep)
    return FinetuneResult(np.concatenate(out), pool, fitness, budget.consumed - start)


def passthrough_directions(recommended: np.ndarray, groups: GroupedSets) -> np.ndarray:
    """Every solution of group ``i`` takes recommended direction ``i`` unchanged."""
    return np.concatenate([np.repeat(recommended[i][None, :], len(groups.solutions[i]), axis=0) for i in range(len(groups))])
