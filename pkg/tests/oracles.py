"""Slow reference implementations that share no code with the package."""

from __future__ import annotations

import itertools
import math

import numpy as np


def dom(a, b) -> bool:
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def ranks_by_peeling(F) -> list[int]:
    """Dominance depth by repeatedly removing the non-dominated layer."""
    n = len(F)
    rank = [-1] * n
    left = set(range(n))
    depth = 0
    while left:
        layer = [i for i in left if not any(dom(F[j], F[i]) for j in left if j != i)]
        for i in layer:
            rank[i] = depth
        left -= set(layer)
        depth += 1
    return rank


def crowding(F) -> list[float]:
    k, m = len(F), len(F[0])
    if k <= 2:
        return [math.inf] * k
    out = [0.0] * k
    for j in range(m):
        col = [row[j] for row in F]
        lo, hi = min(col), max(col)
        if hi == lo:
            continue
        order = sorted(range(k), key=lambda i: (col[i], i))
        out[order[0]] = math.inf
        out[order[-1]] = math.inf
        for p in range(1, k - 1):
            i = order[p]
            if out[i] != math.inf:
                out[i] += (col[order[p + 1]] - col[order[p - 1]]) / (hi - lo)
    return out


def select_by_rules(F, n) -> list[int]:
    """Survivors by the (rank, -crowding, index) fill rule, as a sorted index list."""
    rank = ranks_by_peeling(F)
    chosen = []
    for r in range(max(rank) + 1):
        front = [i for i in range(len(F)) if rank[i] == r]
        if len(chosen) + len(front) <= n:
            chosen += front
            continue
        cd = crowding([F[i] for i in front])
        order = sorted(range(len(front)), key=lambda t: (-cd[t], front[t]))
        chosen += [front[t] for t in order[: n - len(chosen)]]
        break
    return sorted(chosen)


def igd_double_loop(front, approx) -> float:
    total = 0.0
    for r in front:
        total += min(math.sqrt(sum((ri - ai) ** 2 for ri, ai in zip(r, a))) for a in approx)
    return total / len(front)


def hv_inclusion_exclusion(P, ref) -> float:
    """Exact hypervolume of a small set by inclusion-exclusion over all subsets."""
    P = [p for p in P if all(x < r for x, r in zip(p, ref))]
    total = 0.0
    for k in range(1, len(P) + 1):
        for sub in itertools.combinations(P, k):
            corner = np.max(np.asarray(sub), axis=0)
            total += (-1) ** (k + 1) * float(np.prod(np.asarray(ref) - corner))
    return total


def random_nondominated(rng, n, m) -> np.ndarray:
    """Points on a perturbed simplex-like surface, filtered to mutual non-domination."""
    P = rng.random((4 * n, m))
    P /= P.sum(axis=1, keepdims=True)
    keep = [i for i in range(len(P)) if not any(dom(P[j], P[i]) for j in range(len(P)) if j != i)]
    return P[keep[:n]]
