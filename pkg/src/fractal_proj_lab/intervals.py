"""Closed-interval unions on the real line.

Used for the arithmetic Cantor construction and its certified sumset covers.
Unions are kept as parallel (lo, hi) float arrays; merge normalizes them to
disjoint sorted form. Measures of merged unions are exact up to float
rounding of the endpoint arithmetic.
"""

from __future__ import annotations

import numpy as np


def merge(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort and fuse overlapping/touching closed intervals."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return lo.copy(), hi.copy()
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    # running maximum of hi; a new block starts where lo exceeds it
    run_hi = np.maximum.accumulate(hi)
    new_block = np.empty(lo.size, dtype=bool)
    new_block[0] = True
    new_block[1:] = lo[1:] > run_hi[:-1]
    starts = np.flatnonzero(new_block)
    ends = np.append(starts[1:], lo.size) - 1
    return lo[starts], run_hi[ends]


def total_length(lo: np.ndarray, hi: np.ndarray) -> float:
    mlo, mhi = merge(lo, hi)
    return float(np.sum(mhi - mlo))


def intersect(alo, ahi, blo, bhi) -> tuple[np.ndarray, np.ndarray]:
    """Intersection of two merged unions (two-pointer sweep)."""
    alo, ahi = merge(alo, ahi)
    blo, bhi = merge(blo, bhi)
    out_lo, out_hi = [], []
    i = j = 0
    while i < alo.size and j < blo.size:
        lo = max(alo[i], blo[j])
        hi = min(ahi[i], bhi[j])
        if lo <= hi:
            out_lo.append(lo)
            out_hi.append(hi)
        if ahi[i] < bhi[j]:
            i += 1
        else:
            j += 1
    return np.asarray(out_lo, dtype=float), np.asarray(out_hi, dtype=float)


def contains(lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Membership of points in a merged union (vectorized)."""
    lo, hi = merge(lo, hi)
    if lo.size == 0:
        return np.zeros(np.shape(x), dtype=bool)
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(lo, x, side="right") - 1
    ok = idx >= 0
    safe = np.where(ok, idx, 0)
    return ok & (x <= hi[safe])


def distance(lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distance from points to a merged union (0 inside, inf if empty)."""
    lo, hi = merge(lo, hi)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if lo.size == 0:
        return np.full(x.shape, np.inf)
    idx = np.searchsorted(lo, x, side="right") - 1
    d = np.full(x.shape, np.inf)
    has_left = idx >= 0
    d[has_left] = np.maximum(0.0, x[has_left] - hi[idx[has_left]])
    has_right = idx + 1 < lo.size
    d[has_right] = np.minimum(d[has_right], np.maximum(0.0, lo[idx[has_right] + 1] - x[has_right]))
    return d


def box_counts(lo: np.ndarray, hi: np.ndarray, levels, base: int = 2) -> list[int]:
    """Occupied-cell counts of a merged union on grids base**-k, k in levels."""
    lo, hi = merge(lo, hi)
    counts = []
    for k in levels:
        scale = float(base) ** k
        if lo.size == 0:
            counts.append(0)
            continue
        first = np.floor(lo * scale).astype(np.int64)
        last = np.floor(hi * scale).astype(np.int64)
        # merged intervals are disjoint but may share a boundary cell
        n = int(np.sum(last - first + 1))
        overlap = np.sum(first[1:] <= last[:-1])
        counts.append(n - int(overlap))
    return counts
