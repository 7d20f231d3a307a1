"""Domain types, bound handling and function-evaluation accounting.

Populations are stored as flat arrays (``X`` of shape ``(n, d)``, ``F`` of
shape ``(n, m)``) so that million-variable runs stay contiguous in memory.
:class:`Solution` and :class:`Direction` are the single-item views used at the
API edges.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from vmof.errors import BudgetExhausted, DimensionMismatch, NonFiniteObjective

EvaluateFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Problem:
    """A box-constrained multiobjective minimisation problem.

    ``evaluate`` maps one decision vector of length ``dim`` to ``n_obj``
    objective values. ``evaluate_batch``, when given, maps an ``(n, dim)``
    array to ``(n, n_obj)`` and must agree row-for-row with ``evaluate``.
    """

    dim: int
    n_obj: int
    lower: np.ndarray
    upper: np.ndarray
    evaluate: EvaluateFn
    pf_sampler: Callable[[int], np.ndarray] | None = None
    evaluate_batch: EvaluateFn | None = None
    name: str = "problem"
    nadir: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.n_obj < 2:
            raise ValueError("a multiobjective problem needs n_obj >= 2")
        lower = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (self.dim,))
        upper = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (self.dim,))
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        if self.evaluate_batch is not None:
            return np.asarray(self.evaluate_batch(X), dtype=np.float64).reshape(len(X), self.n_obj)
        out = np.empty((len(X), self.n_obj))
        for i, x in enumerate(X):
            out[i] = self.evaluate(x)
        return out


@dataclass
class Solution:
    x: np.ndarray
    f: np.ndarray | None = None
    eval_id: int = 0

    @property
    def evaluated(self) -> bool:
        return self.eval_id > 0


@dataclass(frozen=True)
class Direction:
    """A displacement in decision space, in problem units."""

    v: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 1:
            raise DimensionMismatch("a direction is a 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("direction entries must be finite")
        object.__setattr__(self, "v", v)


@dataclass
class Population:
    """Structure-of-arrays population.

    ``ids`` holds evaluation sequence numbers; 0 marks an unevaluated row, in
    which case the matching ``F`` row is meaningless.
    """

    X: np.ndarray
    F: np.ndarray
    ids: np.ndarray

    def __len__(self) -> int:
        return len(self.X)

    def __getitem__(self, i: int) -> Solution:
        eid = int(self.ids[i])
        return Solution(self.X[i], self.F[i] if eid > 0 else None, eid)

    @property
    def evaluated(self) -> bool:
        return bool(np.all(self.ids > 0))

    def take(self, idx: Sequence[int] | np.ndarray) -> Population:
        idx = np.asarray(idx, dtype=np.intp)
        return Population(self.X[idx], self.F[idx], self.ids[idx])

    def solutions(self) -> list[Solution]:
        return [self[i] for i in range(len(self))]

    @classmethod
    def empty(cls, d: int, m: int) -> Population:
        return cls(np.empty((0, d)), np.empty((0, m)), np.empty(0, dtype=np.int64))

    @classmethod
    def from_solutions(cls, sols: Sequence[Solution], m: int) -> Population:
        X = np.stack([s.x for s in sols]).astype(np.float64, copy=False)
        F = np.zeros((len(sols), m))
        ids = np.zeros(len(sols), dtype=np.int64)
        for i, s in enumerate(sols):
            if s.eval_id > 0:
                F[i] = s.f
                ids[i] = s.eval_id
        return cls(X, F, ids)

    @staticmethod
    def concat(pops: Sequence[Population]) -> Population:
        return Population(
            np.concatenate([p.X for p in pops]),
            np.concatenate([p.F for p in pops]),
            np.concatenate([p.ids for p in pops]),
        )


@dataclass
class EvalBudget:
    """Global function-evaluation counter.

    ``consumed`` doubles as the evaluation sequence number: the k-th
    evaluation ever granted gets ``eval_id == k``. Requests that would cross
    ``total`` are truncated to what remains.
    """

    total: int
    phase_fraction: float = 0.05
    consumed: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _observers: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.total < 1:
            raise ValueError("total budget must be positive")
        if not 0.0 < self.phase_fraction <= 1.0:
            raise ValueError("phase_fraction must lie in (0, 1]")

    @property
    def remaining(self) -> int:
        return self.total - self.consumed

    @property
    def phase_budget(self) -> int:
        return max(1, int(round(self.phase_fraction * self.total)))

    def request(self, k: int) -> tuple[int, int]:
        """Reserve up to ``k`` evaluations; returns ``(first_id, granted)``."""
        with self._lock:
            granted = max(0, min(k, self.total - self.consumed))
            first = self.consumed + 1
            self.consumed += granted
        return first, granted

    def subscribe(self, fn: Callable[[np.ndarray, np.ndarray], None]) -> None:
        """Register ``fn(F, ids)``, called after every successful evaluation batch."""
        self._observers.append(fn)

    def _notify(self, F: np.ndarray, ids: np.ndarray) -> None:
        for fn in self._observers:
            fn(F, ids)


def clamp_to_bounds(x: np.ndarray, problem: Problem, out: np.ndarray | None = None) -> np.ndarray:
    """Project ``x`` (one vector or a stack of them) coordinate-wise onto the box."""
    return np.clip(x, problem.lower, problem.upper, out=out)


def evaluate_batch(problem: Problem, X: np.ndarray, budget: EvalBudget) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the rows of ``X``, charging the budget.

    If fewer evaluations remain than rows, only the leading rows are
    evaluated; callers must look at the length of the returned arrays.
    Raises :class:`BudgetExhausted` when nothing at all can be evaluated.
    """
    X = np.atleast_2d(X)
    if len(X) == 0:
        return np.empty((0, problem.n_obj)), np.empty(0, dtype=np.int64)
    first, granted = budget.request(len(X))
    if granted == 0:
        raise BudgetExhausted(f"budget of {budget.total} evaluations exhausted")
    F = problem.evaluate_many(X[:granted] if granted < len(X) else X)
    if not np.all(np.isfinite(F)):
        raise NonFiniteObjective(f"{problem.name} returned a non-finite objective")
    ids = np.arange(first, first + granted, dtype=np.int64)
    budget._notify(F, ids)
    return F, ids


def evaluate_solution(problem: Problem, s: Solution, budget: EvalBudget) -> Solution:
    F, ids = evaluate_batch(problem, np.asarray(s.x, dtype=np.float64)[None, :], budget)
    return Solution(s.x, F[0], int(ids[0]))


def evaluate_population(problem: Problem, X: np.ndarray, budget: EvalBudget) -> Population:
    F, ids = evaluate_batch(problem, X, budget)
    return Population(X[: len(F)], F, ids)


def random_population(problem: Problem, n: int, rng: np.random.Generator) -> Population:
    """Draw ``n`` unevaluated solutions uniformly from the box."""
    if n < 1:
        raise ValueError("n must be positive")
    X = rng.random((n, problem.dim))
    X *= problem.span
    X += problem.lower
    return Population(X, np.zeros((n, problem.n_obj)), np.zeros(n, dtype=np.int64))


def random_directions(problem: Problem, n: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform directions in ``[-scale*range, +scale*range]`` per coordinate, shape ``(n, d)``."""
    if scale < 0:
        raise ValueError("scale must be non-negative")
    D = rng.random((n, problem.dim))
    D *= 2.0
    D -= 1.0
    D *= scale * problem.span
    return D
