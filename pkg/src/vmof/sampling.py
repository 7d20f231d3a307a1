"""Thompson-sampling recommendation of evolution directions.

Directions and solutions are split into ``n_d`` random groups and paired by
position. Inside a group every solution is repeatedly pushed along its
direction, each direction is rewarded when its solution lands on the group's
first non-dominated front, and the group is then evolved by the inner
optimizer. One direction per group is finally recommended by drawing from
the Beta posteriors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from vmof.core import EvalBudget, Population, Problem, clamp_to_bounds, evaluate_batch
from vmof.dominance import first_front_flags
from vmof.errors import BudgetExhausted, DimensionMismatch, IndivisibleGrouping
from vmof.optimizer import NSGA2Operator

RewardMode = Literal["front", "pairwise", "none"]


@dataclass
class BetaArms:
    alpha: np.ndarray
    beta: np.ndarray

    @classmethod
    def uniform(cls, k: int) -> BetaArms:
        return cls(np.ones(k), np.ones(k))

    def __len__(self) -> int:
        return len(self.alpha)

    @property
    def mean(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)


def beta_sample_mean(arms: BetaArms, rng: np.random.Generator) -> np.ndarray:
    """One draw of the estimated mean reward per arm."""
    theta = rng.beta(arms.alpha, arms.beta)
    # keep draws in the open interval even if the sampler rounds to an end
    return np.clip(theta, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def parameter_update(
    arms: BetaArms,
    flags,
    cap: float | None = None,
    active=None,
) -> BetaArms:
    """Credit each arm with its 0/1 reward: a 1 bumps alpha, a 0 bumps beta.

    ``active`` restricts the update to a subset of arm indices (the arms that
    were actually played). With ``cap`` set, an arm whose alpha+beta has
    reached it is first shrunk by ``cap/(cap+1)`` so old evidence decays.
    """
    flags = np.asarray(flags)
    idx = np.arange(len(arms)) if active is None else np.asarray(active, dtype=np.intp)
    if flags.shape != idx.shape:
        raise DimensionMismatch(f"{flags.size} flags for {idx.size} arms")
    alpha = arms.alpha.copy()
    beta = arms.beta.copy()
    if cap is not None:
        full = alpha[idx] + beta[idx] >= cap
        shrink = np.where(full, cap / (cap + 1.0), 1.0)
        alpha[idx] *= shrink
        beta[idx] *= shrink
    r = (flags != 0).astype(np.float64)
    alpha[idx] += r
    beta[idx] += 1.0 - r
    return BetaArms(alpha, beta)


def partition_random(n_items: int, n_groups: int, rng: np.random.Generator) -> list[np.ndarray]:
    """A random permutation of ``range(n_items)`` cut into equal blocks."""
    if n_groups < 1 or n_items % n_groups:
        raise IndivisibleGrouping(f"{n_items} items do not split into {n_groups} equal groups")
    return np.split(rng.permutation(n_items), n_groups)


@dataclass
class GroupedSets:
    """Paired groups: row ``j`` of ``directions[i]`` drives row ``j`` of ``solutions[i]``."""

    directions: list[np.ndarray]
    solutions: list[Population]
    dir_index: list[np.ndarray]
    sol_index: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.directions)


@dataclass
class SamplingConfig:
    n_d: int = 25
    reward_mode: RewardMode = "front"
    dts_cap: float | None = None
    budget_split: Literal["even", "shared"] = "even"
    move_acceptance: Literal["always", "not_dominated"] = "always"


@dataclass
class SamplingResult:
    recommended: np.ndarray
    groups: GroupedSets
    arms: list[BetaArms] = field(default_factory=list)
    evaluations: int = 0


def _dominated_by(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Row-wise: is ``F[j]`` dominated by ``G[j]``?"""
    return np.all(G <= F, axis=1) & np.any(G < F, axis=1)


def _rewards(mode: RewardMode, F_new: np.ndarray, F_old: np.ndarray) -> np.ndarray:
    """Per-row 0/1 rewards for a group that was just moved."""
    if mode == "pairwise":
        return _dominated_by(F_old, F_new).astype(np.uint8)
    return first_front_flags(F_new)


def evolution_directions_sampling(
    dirs: np.ndarray,
    pop: Population,
    n_d: int,
    phase_budget: int,
    inner: NSGA2Operator,
    problem: Problem,
    budget: EvalBudget,
    rng: np.random.Generator,
    config: SamplingConfig | None = None,
) -> SamplingResult:
    cfg = config or SamplingConfig(n_d=n_d)
    N = len(pop)
    if len(dirs) != N:
        raise DimensionMismatch(f"{len(dirs)} directions for {N} solutions")
    dir_groups = partition_random(N, n_d, rng)
    sol_groups = partition_random(N, n_d, rng)
    streams = rng.spawn(n_d)
    start = budget.consumed
    share = phase_budget // n_d if cfg.budget_split == "even" else phase_budget
    evaluate = lambda X: evaluate_batch(problem, X, budget)  # noqa: E731

    groups = GroupedSets([], [], dir_groups, sol_groups)
    recommended = np.empty((n_d, problem.dim))
    all_arms = []
    for i in range(n_d):
        g_rng = streams[i]
        D = dirs[dir_groups[i]]
        sols = pop.take(sol_groups[i])
        arms = BetaArms.uniform(len(D))
        group_start = budget.consumed

        def spent() -> int:
            if cfg.budget_split == "even":
                return budget.consumed - group_start
            return budget.consumed - start

        try:
            while spent() < share:
                moved = clamp_to_bounds(sols.X + D, problem)
                F, ids = evaluate(moved)
                k = len(F)
                X = sols.X.copy()
                X[:k] = moved[:k]
                Fa = sols.F.copy()
                Fa[:k] = F
                ida = sols.ids.copy()
                ida[:k] = ids
                if cfg.reward_mode != "none":
                    flags = _rewards(cfg.reward_mode, Fa, sols.F)[:k]
                    arms = parameter_update(arms, flags, cfg.dts_cap, active=np.arange(k))
                if cfg.move_acceptance == "not_dominated":
                    back = np.nonzero(_dominated_by(Fa[:k], sols.F[:k]))[0]
                    X[back], Fa[back], ida[back] = sols.X[back], sols.F[back], sols.ids[back]
                sols = Population(X, Fa, ida)
                if spent() >= share or budget.remaining == 0:
                    break
                sols = inner(sols, problem.lower, problem.upper, evaluate, g_rng)
        except BudgetExhausted:
            pass
        if cfg.reward_mode == "none":
            # ablation: same moves and budget, recommendation ignores rewards
            k_best = int(g_rng.integers(len(D)))
        else:
            k_best = int(np.argmax(beta_sample_mean(arms, g_rng)))
        recommended[i] = D[k_best]
        groups.directions.append(D)
        groups.solutions.append(sols)
        all_arms.append(arms)
    return SamplingResult(recommended, groups, all_arms, budget.consumed - start)


def thompson_bandit(means, rounds: int, rng: np.random.Generator, cap: float | None = None) -> tuple[np.ndarray, int]:
    """Play a Bernoulli bandit with the same draw and update steps as the sampler.

    Each round draws one mean per arm, plays the argmax and credits that arm
    alone. Returns the arm played in every round and the final recommendation
    (argmax of one more draw).
    """
    means = np.asarray(means, dtype=np.float64)
    arms = BetaArms.uniform(len(means))
    played = np.empty(rounds, dtype=np.intp)
    for t in range(rounds):
        k = int(np.argmax(beta_sample_mean(arms, rng)))
        played[t] = k
        reward = np.uint8(rng.random() < means[k])
        arms = parameter_update(arms, [reward], cap, active=[k])
    return played, int(np.argmax(beta_sample_mean(arms, rng)))
