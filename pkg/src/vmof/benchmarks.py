"""Scalable test problems, reference fronts and quality indicators.

``sp1`` is a ZDT1-shaped bi-objective problem and ``sp2`` a DTLZ2-shaped
tri-objective one; both live on ``[0, 1]^d`` and have analytic fronts.
Further families can be added with :func:`register_problem` and are then
reachable through descriptor strings such as ``"sp1:d=1000"``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from vmof import kernels
from vmof.core import Problem
from vmof.errors import (
    DimensionMismatch,
    NoAnalyticFront,
    OutOfBounds,
    UnknownProblem,
    UnsupportedObjectiveCount,
)


def _check_unit_box(X: np.ndarray) -> None:
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise OutOfBounds("decision vector outside [0, 1]^d")


def sp1_batch(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    d = X.shape[1]
    if d < 2:
        raise DimensionMismatch("sp1 needs d >= 2")
    _check_unit_box(X)
    f1 = X[:, 0]
    g = 1.0 + 9.0 * X[:, 1:].sum(axis=1) / (d - 1)
    f2 = g * (1.0 - np.sqrt(f1 / g))
    return np.column_stack((f1, f2))


def sp1_evaluate(x) -> np.ndarray:
    """f1 = x1, f2 = g(1 - sqrt(x1/g)) with g = 1 + 9 * mean(x2..xd)."""
    return sp1_batch(np.asarray(x, dtype=np.float64)[None, :])[0]


def sp2_batch(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] < 3:
        raise DimensionMismatch("sp2 needs d >= 3")
    _check_unit_box(X)
    tail = X[:, 2:] - 0.5
    g = np.einsum("ij,ij->i", tail, tail)
    a = X[:, 0] * (math.pi / 2)
    b = X[:, 1] * (math.pi / 2)
    r = 1.0 + g
    return np.column_stack((r * np.cos(a) * np.cos(b), r * np.cos(a) * np.sin(b), r * np.sin(a)))


def sp2_evaluate(x) -> np.ndarray:
    return sp2_batch(np.asarray(x, dtype=np.float64)[None, :])[0]


def sp1_front(k: int) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, k)
    return np.column_stack((f1, 1.0 - np.sqrt(f1)))


def _triangle_count(h: int) -> int:
    return (h + 1) * (h + 2) // 2


def sp2_front(k: int) -> np.ndarray:
    """Octant of the unit sphere on a triangular grid of angles.

    Row ``i`` of the grid has elevation ``i/H`` (as a fraction of pi/2) and
    ``H - i + 1`` evenly spaced azimuths, which gives ``(H+1)(H+2)/2`` points.
    """
    h = 0
    while _triangle_count(h) < k:
        h += 1
    pts = []
    for i in range(h + 1):
        a = (i / h if h else 0.0) * (math.pi / 2)
        n_az = h - i
        for j in range(n_az + 1):
            b = (j / n_az if n_az else 0.0) * (math.pi / 2)
            pts.append((math.cos(a) * math.cos(b), math.cos(a) * math.sin(b), math.sin(a)))
    P = np.asarray(pts)
    if len(P) > k:
        P = P[np.unique(np.round(np.linspace(0, len(P) - 1, k)).astype(int))]
    return P


def make_sp1(d: int = 30) -> Problem:
    if d < 2:
        raise DimensionMismatch("sp1 needs d >= 2")
    return Problem(
        dim=d,
        n_obj=2,
        lower=np.zeros(d),
        upper=np.ones(d),
        evaluate=sp1_evaluate,
        evaluate_batch=sp1_batch,
        pf_sampler=sp1_front,
        name=f"sp1:d={d}",
        nadir=np.ones(2),
    )


def make_sp2(d: int = 30) -> Problem:
    if d < 3:
        raise DimensionMismatch("sp2 needs d >= 3")
    return Problem(
        dim=d,
        n_obj=3,
        lower=np.zeros(d),
        upper=np.ones(d),
        evaluate=sp2_evaluate,
        evaluate_batch=sp2_batch,
        pf_sampler=sp2_front,
        name=f"sp2:d={d}",
        nadir=np.ones(3),
    )


_REGISTRY: dict[str, Callable[..., Problem]] = {"sp1": make_sp1, "sp2": make_sp2}


def register_problem(name: str, factory: Callable[..., Problem]) -> None:
    """Make ``factory(**params)`` reachable as ``"name:key=value,..."``."""
    _REGISTRY[name.lower()] = factory


def registered_problems() -> list[str]:
    return sorted(_REGISTRY)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_descriptor(descriptor: str) -> tuple[str, dict]:
    name, _, rest = descriptor.strip().partition(":")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad parameter {item!r} in {descriptor!r}")
        params[key.strip()] = _parse_value(value.strip())
    return name.lower(), params


def load_external_problem(descriptor: str) -> Problem:
    name, params = parse_descriptor(descriptor)
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblem(f"no problem family {name!r} registered") from None
    return factory(**params)


@dataclass
class ReferenceFront:
    points: np.ndarray
    source: str = "analytic"

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))


def sample_reference_front(problem: Problem, k: int | None = None) -> ReferenceFront:
    """Analytic front samples; 1000 points for two objectives, 990 for three."""
    if problem.pf_sampler is None:
        raise NoAnalyticFront(f"{problem.name} has no analytic Pareto front")
    if k is None:
        k = 1000 if problem.n_obj == 2 else 990
    return ReferenceFront(problem.pf_sampler(k), "analytic")


def save_front_csv(path, points) -> None:
    points = np.atleast_2d(points)
    header = ",".join(f"f{i + 1}" for i in range(points.shape[1]))
    np.savetxt(path, points, delimiter=",", header=header, comments="# ", fmt="%.17g")


def load_front_csv(path) -> ReferenceFront:
    """Read a front written by :func:`save_front_csv` or any plain numeric CSV.

    Lines starting with ``#`` are ignored, as is a non-numeric header row.
    """
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            if rows:
                raise
    return ReferenceFront(np.asarray(rows), "file")


def _as_front(front) -> np.ndarray:
    return front.points if isinstance(front, ReferenceFront) else np.atleast_2d(np.asarray(front, dtype=np.float64))


def igd(front, approx) -> float:
    """Mean Euclidean distance from each reference point to its nearest approximation point."""
    R = _as_front(front)
    A = np.atleast_2d(np.asarray(approx, dtype=np.float64))
    if len(A) == 0:
        return math.inf
    if R.shape[1] != A.shape[1]:
        raise DimensionMismatch(f"front has {R.shape[1]} objectives, approximation {A.shape[1]}")
    block = max(1, 2_000_000 // max(1, len(A) * R.shape[1]))
    nearest = np.empty(len(R))
    for s in range(0, len(R), block):
        diff = R[s : s + block, None, :] - A[None, :, :]
        nearest[s : s + block] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
    return float(nearest.mean())


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    if len(P) == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    vol = 0.0
    best = ref[1]
    for f1, f2 in P:
        if f2 < best:
            vol += (ref[0] - f1) * (best - f2)
            best = f2
    return vol


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    if len(P) == 0:
        return 0.0
    P = P[np.argsort(P[:, 2], kind="stable")]
    vol = 0.0
    z = P[:, 2]
    i = 0
    n = len(P)
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        top = z[j] if j < n else ref[2]
        vol += _hv2d(P[:j, :2], ref[:2]) * (top - z[i])
        i = j
    return vol


def hypervolume(approx, ref_point, mc_samples: int | None = None, rng=None) -> float:
    """Exact hypervolume for two or three objectives.

    Only points strictly better than ``ref_point`` in every objective
    contribute. For more objectives pass ``mc_samples`` to get a Monte Carlo
    estimate instead (see :func:`hypervolume_mc` for its standard error).
    """
    A = np.atleast_2d(np.asarray(approx, dtype=np.float64))
    ref = np.asarray(ref_point, dtype=np.float64)
    if A.size == 0:
        return 0.0
    m = A.shape[1]
    if m != len(ref):
        raise DimensionMismatch("reference point and points differ in length")
    A = A[np.all(A < ref, axis=1)]
    if len(A) == 0:
        return 0.0
    A = A[kernels.nondominated_mask(A)]
    if m == 2:
        return _hv2d(A, ref)
    if m == 3:
        return _hv3d(A, ref)
    if mc_samples:
        return hypervolume_mc(A, ref, mc_samples, rng)[0]
    raise UnsupportedObjectiveCount(f"exact hypervolume supports 2 or 3 objectives, got {m}")


def hypervolume_mc(approx, ref_point, n_samples: int, rng=None) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error."""
    rng = np.random.default_rng(rng)
    A = np.atleast_2d(np.asarray(approx, dtype=np.float64))
    ref = np.asarray(ref_point, dtype=np.float64)
    A = A[np.all(A < ref, axis=1)]
    if len(A) == 0:
        return 0.0, 0.0
    lo = A.min(axis=0)
    box = float(np.prod(ref - lo))
    hits = 0
    chunk = 100_000
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        S = lo + rng.random((k, len(ref))) * (ref - lo)
        covered = np.zeros(k, dtype=bool)
        for a in A:
            covered |= np.all(S >= a, axis=1)
        hits += int(covered.sum())
        done += k
    p = hits / n_samples
    return box * p, box * math.sqrt(p * (1 - p) / n_samples)


def hv_reference_point(problem: Problem) -> np.ndarray:
    """1.1 times the nadir of the analytic front."""
    if problem.nadir is not None:
        nadir = np.asarray(problem.nadir, dtype=np.float64)
    else:
        nadir = sample_reference_front(problem).points.max(axis=0)
    return 1.1 * nadir
