"""Two-sided Wilcoxon rank-sum test with midranks."""

from __future__ import annotations

import itertools
import math

import numpy as np

EXACT_MAX = 10


def midranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _normal_p(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = len(a), len(b)
    n = na + nb
    pooled = np.concatenate((a, b))
    r = midranks(pooled)
    w = r[:na].sum()
    mean = na * (n + 1) / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie = float(np.sum(counts**3 - counts))
    var = na * nb / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0.0:
        return 1.0
    z = abs(w - mean) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def _exact_p(a: np.ndarray, b: np.ndarray) -> float:
    """Permutation p-value: share of relabellings whose rank sum is at least as extreme."""
    na = len(a)
    pooled = np.concatenate((a, b))
    r = midranks(pooled)
    mean = na * (len(pooled) + 1) / 2.0
    observed = abs(r[:na].sum() - mean)
    hits = total = 0
    for idx in itertools.combinations(range(len(pooled)), na):
        total += 1
        if abs(r[list(idx)].sum() - mean) >= observed - 1e-9:
            hits += 1
    return hits / total


def wilcoxon_rank_sum(a, b, alpha: float = 0.05, exact: bool = False) -> tuple[float, str]:
    """p-value and mark for samples ``a`` and ``b`` of a metric to minimise.

    The mark is ``'='`` when ``p >= alpha``, otherwise ``'+'`` if ``a`` has
    the smaller median and ``'-'`` if not. ``exact`` enumerates every
    relabelling and needs at most ``EXACT_MAX`` values per side.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least two values")
    if exact:
        if max(len(a), len(b)) > EXACT_MAX:
            raise ValueError(f"exact mode supports at most {EXACT_MAX} values per side")
        p = _exact_p(a, b)
    else:
        p = _normal_p(a, b)
    if p >= alpha:
        return p, "="
    return p, "+" if np.median(a) < np.median(b) else "-"
