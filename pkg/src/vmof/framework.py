"""The outer optimisation loop: sampling, fine-tuning and swarm phases.

Each iteration spends up to one phase budget (``phase_fraction * E``) in
each of the three phases. Directions flow through the loop: the swarm's final
velocities become the candidate directions of the next sampling phase.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from vmof.benchmarks import hv_reference_point, hypervolume, igd, sample_reference_front
from vmof.core import EvalBudget, Population, Problem, evaluate_population, random_directions, random_population
from vmof.dominance import environmental_select, select_indices
from vmof.errors import ConfigInvalid
from vmof.finetuning import FinetuneConfig, evolution_directions_finetuning, passthrough_directions
from vmof.optimizer import NSGA2Operator, PsoParams, VariationParams, directed_pso, init_swarm
from vmof.sampling import SamplingConfig, evolution_directions_sampling
from vmof import kernels

PHASES = ("sampling", "finetuning", "optimizer")


def default_population_size(n_obj: int) -> int:
    return 100 if n_obj == 2 else 105


def default_n_d(population_size: int) -> int:
    """Largest divisor of N that does not exceed N/4 (25 for N=100, 21 for N=105)."""
    for k in range(population_size // 4, 0, -1):
        if population_size % k == 0:
            return k
    return 1


@dataclass
class VmofConfig:
    population_size: int = 100
    n_d: int | None = None
    total_budget: int = 100_000
    phase_fraction: float = 0.05
    seed: int = 0
    init_direction_scale: float = 0.1
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    finetune: FinetuneConfig = field(default_factory=FinetuneConfig)
    pso: PsoParams = field(default_factory=PsoParams)
    variation: VariationParams = field(default_factory=VariationParams)

    def __post_init__(self) -> None:
        if self.n_d is None:
            self.n_d = default_n_d(self.population_size)
        self.sampling.n_d = self.n_d

    @classmethod
    def for_problem(cls, problem: Problem, **overrides) -> VmofConfig:
        overrides.setdefault("population_size", default_population_size(problem.n_obj))
        return cls(**overrides)

    @property
    def phase_budget(self) -> int:
        return max(1, int(round(self.phase_fraction * self.total_budget)))

    def validate(self) -> None:
        N = self.population_size
        if N < 1 or self.n_d < 1 or N % self.n_d:
            raise ConfigInvalid(f"n_d={self.n_d} must divide population size {N}")
        if not 0.0 < self.phase_fraction <= 1.0 / 3.0:
            raise ConfigInvalid("three phase budgets must fit in the total budget")
        if self.total_budget < N:
            raise ConfigInvalid(f"budget {self.total_budget} cannot evaluate the initial population of {N}")
        if self.total_budget > N and self.phase_budget < N:
            raise ConfigInvalid(f"phase budget {self.phase_budget} is smaller than the population")
        if self.init_direction_scale < 0:
            raise ConfigInvalid("init_direction_scale must be non-negative")
        if self.sampling.reward_mode not in ("front", "pairwise", "none"):
            raise ConfigInvalid(f"unknown reward_mode {self.sampling.reward_mode!r}")
        if self.sampling.budget_split not in ("even", "shared"):
            raise ConfigInvalid(f"unknown budget_split {self.sampling.budget_split!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PhaseRecord:
    iteration: int
    phase: str
    consumed: int
    igd: float = math.nan
    hv: float = math.nan


class ObjectiveTrace:
    """Best-so-far non-dominated set of every objective vector evaluated.

    Subscribed to an :class:`EvalBudget`, it sees each evaluation batch. With
    ``checkpoint_every`` set it also records (consumed, igd, hv) whenever the
    evaluation count crosses a multiple of that interval.
    """

    def __init__(self, front=None, ref_point=None, checkpoint_every: int | None = None):
        self.front = front
        self.ref_point = ref_point
        self.F: np.ndarray | None = None
        self.checkpoint_every = checkpoint_every
        self.checkpoints: list[tuple[int, float, float]] = []
        self._next_checkpoint = checkpoint_every or 0
        self.consumed = 0

    def __call__(self, F: np.ndarray, ids: np.ndarray) -> None:
        self.add(F)
        self.consumed = int(ids[-1])
        if self.checkpoint_every:
            while self.consumed >= self._next_checkpoint:
                self.checkpoints.append((self._next_checkpoint, *self.metrics()))
                self._next_checkpoint += self.checkpoint_every

    def add(self, F: np.ndarray) -> None:
        F = F[kernels.nondominated_mask(F)]
        if self.F is None or len(self.F) == 0:
            self.F = np.unique(F, axis=0)
            return
        A = self.F
        # [i, j]: archive row j weakly dominates new row i
        weak = np.all(A[None, :, :] <= F[:, None, :], axis=2)
        F = F[~weak.any(axis=1)]
        if len(F) == 0:
            return
        F = np.unique(F, axis=0)
        gone = np.all(F[:, None, :] <= A[None, :, :], axis=2) & np.any(F[:, None, :] < A[None, :, :], axis=2)
        self.F = np.concatenate((A[~gone.any(axis=0)], F))

    def metrics(self) -> tuple[float, float]:
        if self.front is None or self.F is None:
            return math.nan, math.nan
        return igd(self.front, self.F), hypervolume(self.F, self.ref_point)


@dataclass
class VmofResult:
    population: Population
    history: list[PhaseRecord]
    evaluations: int
    iterations: int
    archive: np.ndarray | None = None
    checkpoints: list = field(default_factory=list)


def _unique_by_id(pops: list[Population]) -> Population:
    merged = Population.concat(pops)
    _, first = np.unique(merged.ids, return_index=True)
    return merged.take(np.sort(first))


def vmof_run(problem: Problem, cfg: VmofConfig, checkpoint_every: int | None = None) -> VmofResult:
    """Optimise ``problem`` within ``cfg.total_budget`` evaluations.

    History holds one record per completed phase, measured on the
    best-so-far archive of every evaluated objective vector.
    """
    cfg.validate()
    N = cfg.population_size
    budget = EvalBudget(cfg.total_budget, cfg.phase_fraction)
    front = ref = None
    if problem.pf_sampler is not None:
        front = sample_reference_front(problem)
        ref = hv_reference_point(problem)
    trace = ObjectiveTrace(front, ref, checkpoint_every)
    budget.subscribe(trace)

    root = np.random.default_rng(cfg.seed)
    pop = evaluate_population(problem, random_population(problem, N, root).X, budget)
    D = random_directions(problem, N, cfg.init_direction_scale, root)
    inner = NSGA2Operator(cfg.variation)
    history: list[PhaseRecord] = []
    live = [pop]
    it = 0

    def record(phase: str) -> None:
        history.append(PhaseRecord(it, phase, budget.consumed, *trace.metrics()))

    while budget.remaining > 0:
        it += 1
        s_rng, f_rng, o_rng = np.random.default_rng([cfg.seed, it]).spawn(3)

        samp = evolution_directions_sampling(
            D, pop, cfg.n_d, min(cfg.phase_budget, budget.remaining), inner, problem, budget, s_rng, cfg.sampling
        )
        pop = Population.concat(samp.groups.solutions)
        D = np.concatenate(samp.groups.directions)
        live = [pop]
        record("sampling")
        if budget.remaining == 0:
            break

        if cfg.finetune.enabled:
            ft = evolution_directions_finetuning(
                samp.recommended,
                samp.groups,
                min(cfg.phase_budget, budget.remaining),
                inner,
                problem,
                budget,
                f_rng,
                cfg.finetune,
                pool_keep=N,
            )
            sel = select_indices(np.concatenate((pop.F, ft.pool.F)), N)
            own = sel[sel < N]
            chosen, pool_dirs = ft.pool.materialize(problem, sel[sel >= N] - N)
            pop = Population.concat([pop.take(own), chosen])
            D = np.concatenate((ft.directions[own], pool_dirs))
        else:
            D = passthrough_directions(samp.recommended, samp.groups)
        # phase outputs hold d-length rows; drop them before the swarm allocates its own
        samp = ft = None
        live = [pop]
        record("finetuning")
        if budget.remaining == 0:
            break

        state = directed_pso(
            init_swarm(pop, D, N), min(cfg.phase_budget, budget.remaining), cfg.pso, problem, budget, o_rng
        )
        pop, D = state.positions, state.velocities
        live = [state.positions, state.pbest, state.archive]
        record("optimizer")

    final = environmental_select(_unique_by_id(live), N) if sum(map(len, live)) > N else live[0]
    return VmofResult(final, history, budget.consumed, it, trace.F, trace.checkpoints)
