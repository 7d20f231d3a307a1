"""Pure numpy implementations of the dominance kernels.

Results are bit-identical to the compiled ``_kernels`` module; the test suite
checks this on random inputs.
"""

import numpy as np

# Rows per block when building pairwise comparison tables, keeps peak memory
# around block * n * m bytes.
_BLOCK = 512


def _dominance_matrix(F: np.ndarray) -> np.ndarray:
    n = len(F)
    dom = np.empty((n, n), dtype=bool)
    for s in range(0, n, _BLOCK):
        a = F[s : s + _BLOCK, None, :]
        le = np.all(a <= F[None, :, :], axis=2)
        lt = np.any(a < F[None, :, :], axis=2)
        dom[s : s + _BLOCK] = le & lt
    return dom


def nondominated_ranks(F: np.ndarray) -> np.ndarray:
    n = len(F)
    rank = np.zeros(n, dtype=np.int64)
    if n == 0:
        return rank
    dom = _dominance_matrix(F)
    count = dom.sum(axis=0)
    current = np.flatnonzero(count == 0)
    r = 0
    while current.size:
        rank[current] = r
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
        r += 1
    return rank


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    n = len(F)
    mask = np.ones(n, dtype=bool)
    for s in range(0, n, _BLOCK):
        b = F[s : s + _BLOCK, None, :]
        # [i, j]: F[j] dominates F[s + i]
        le = np.all(F[None, :, :] <= b, axis=2)
        lt = np.any(F[None, :, :] < b, axis=2)
        mask[s : s + _BLOCK] = ~np.any(le & lt, axis=1)
    return mask


def dominator_counts(F: np.ndarray) -> np.ndarray:
    if len(F) == 0:
        return np.zeros(0, dtype=np.int64)
    return _dominance_matrix(F).sum(axis=0).astype(np.int64)


def crowding_distance(F: np.ndarray) -> np.ndarray:
    n, m = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        col = F[order, k]
        span = col[-1] - col[0]
        if span <= 0.0:
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
    return dist
