"""Pareto dominance, non-dominated sorting, crowding and survivor selection.

All objectives are minimised. Ties are broken by the lower row index so that
every routine is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vmof import kernels
from vmof.core import Population
from vmof.errors import DimensionMismatch


@dataclass
class FrontAssignment:
    rank: np.ndarray
    fronts: list[list[int]]


def dominates(fa, fb) -> bool:
    """True iff ``fa`` is no worse than ``fb`` everywhere and better somewhere."""
    fa = np.asarray(fa, dtype=np.float64)
    fb = np.asarray(fb, dtype=np.float64)
    if fa.shape != fb.shape:
        raise DimensionMismatch(f"objective vectors of shape {fa.shape} and {fb.shape}")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def _fronts_from_ranks(rank: np.ndarray) -> list[list[int]]:
    if rank.size == 0:
        return []
    order = np.argsort(rank, kind="stable")
    cuts = np.flatnonzero(np.diff(rank[order])) + 1
    return [chunk.tolist() for chunk in np.split(order, cuts)]


def fast_nondominated_sort(objs) -> FrontAssignment:
    rank = kernels.nondominated_ranks(objs)
    return FrontAssignment(rank, _fronts_from_ranks(rank))


def crowding_distance(front_objs) -> np.ndarray:
    """Crowding distance of each row within one front.

    Boundary rows of every non-constant objective get ``inf``; a constant
    objective contributes nothing. Fronts of one or two rows are all ``inf``.
    """
    return kernels.crowding_distance(front_objs)


def first_front_flags(objs) -> np.ndarray:
    """1 for rows on the first non-dominated front, 0 elsewhere."""
    return kernels.nondominated_mask(objs).astype(np.uint8)


def rank_and_crowding(F) -> tuple[np.ndarray, np.ndarray]:
    """Front rank of every row and its crowding distance within its own front."""
    F = np.asarray(F, dtype=np.float64)
    rank = kernels.nondominated_ranks(F)
    crowd = np.empty(len(F))
    for front in _fronts_from_ranks(rank):
        crowd[front] = kernels.crowding_distance(F[front])
    return rank, crowd


def select_indices(F, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors of NSGA-II truncation, in ascending order.

    Whole fronts are admitted by ascending rank; the front that does not fit
    is cut by descending crowding distance, then by index.
    """
    F = np.asarray(F, dtype=np.float64)
    p = len(F)
    if n > p:
        raise ValueError(f"cannot select {n} survivors from {p} candidates")
    if n == p:
        return np.arange(p)
    rank = kernels.nondominated_ranks(F)
    chosen: list[int] = []
    for front in _fronts_from_ranks(rank):
        room = n - len(chosen)
        if len(front) <= room:
            chosen.extend(front)
            if len(front) == room:
                break
            continue
        crowd = kernels.crowding_distance(F[front])
        # lexsort: last key is primary
        order = np.lexsort((np.asarray(front), -crowd))
        chosen.extend(np.asarray(front)[order[:room]].tolist())
        break
    return np.sort(np.asarray(chosen, dtype=np.intp))


def environmental_select(pop: Population, n: int) -> Population:
    return pop.take(select_indices(pop.F, n))


def nondominated_unique(F) -> np.ndarray:
    """Indices of non-dominated rows, keeping only the first of exact duplicates."""
    F = np.asarray(F, dtype=np.float64)
    if len(F) == 0:
        return np.zeros(0, dtype=np.intp)
    _, first = np.unique(F, axis=0, return_index=True)
    first = np.sort(first)
    keep = kernels.nondominated_mask(F[first])
    return first[keep]
