"""Box-counting readouts: dimension fits, outer-measure estimates,
intersections of covers and longest-run interior proxies.

Box (Minkowski) dimension stands in for Hausdorff dimension throughout;
the two agree on the self-similar test sets used here and box counting is
the only desk-scale-computable proxy. Every experiment report states this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DyadicCover, PointMeasure, _common_grid, _rows_isin

# Coarsest levels sit at the set's overall diameter and the finest at grid
# saturation; both bias the fit, so the default range drops them.
DEFAULT_COARSE_SKIP = 3
DEFAULT_FINE_SKIP = 1


@dataclass
class ScalingFit:
    """Least-squares fit of log2(count) against level * log2(base)."""

    levels: list
    counts: list
    slope: float
    intercept: float
    r2: float
    base: int = 2

    def __post_init__(self):
        if any(c <= 0 for c in self.counts):
            raise ValueError("counts must be positive")


def _fit(levels, counts, base: int) -> ScalingFit:
    x = np.asarray(levels, dtype=float) * np.log2(base)
    y = np.log2(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(list(levels), [int(c) for c in counts], float(slope), float(intercept), r2, int(base))


def occupancy_counts(obj, levels, base: int = 2) -> list[int]:
    """Occupied-cell counts of a cover or point set at the given levels."""
    counts = []
    if isinstance(obj, DyadicCover):
        for k in levels:
            if k > obj.level:
                raise ValueError(f"level {k} finer than the cover's level {obj.level}")
            counts.append(obj.coarsen(obj.level - k).count)
        return counts
    points = obj.points if isinstance(obj, PointMeasure) else np.atleast_2d(np.asarray(obj, dtype=float))
    for k in levels:
        cells = np.floor(points * float(base) ** k).astype(np.int64)
        counts.append(np.unique(cells, axis=0).shape[0])
    return counts


def box_dimension(obj, level_min: int | None = None, level_max: int | None = None) -> ScalingFit:
    """Box-counting dimension estimate over a dyadic (or the cover's own
    grid) level range.

    Defaults drop the 3 coarsest and 1 finest available levels. The range
    must span at least 3 level steps.
    """
    if isinstance(obj, DyadicCover):
        if obj.is_empty:
            raise ValueError("cannot fit the dimension of an empty set")
        base = obj.base
        top = obj.level
    else:
        points = obj.points if isinstance(obj, PointMeasure) else np.atleast_2d(np.asarray(obj, dtype=float))
        if points.shape[0] == 0:
            raise ValueError("cannot fit the dimension of an empty set")
        base = 2
        top = 12  # finest dyadic level probed for raw point sets
    if level_max is None:
        level_max = top - DEFAULT_FINE_SKIP
    if level_min is None:
        level_min = min(DEFAULT_COARSE_SKIP, max(0, level_max - DEFAULT_COARSE_SKIP))
    if level_max - level_min < 3:
        raise ValueError(f"fit range [{level_min}, {level_max}] too narrow; need >= 3 level steps")
    levels = list(range(level_min, level_max + 1))
    counts = occupancy_counts(obj, levels, base)
    if counts[0] <= 0:
        raise ValueError("cannot fit the dimension of an empty set")
    return _fit(levels, counts, base)


def measure_estimate(cover: DyadicCover) -> float:
    """Outer estimate of the cover's d-dimensional content at its scale:
    count * width**dim. Exactly 1.0 for a full cover of [0,1]**d."""
    return cover.count / float(cover.base) ** (cover.level * cover.dim)


def intersect_covers(p: DyadicCover, q: DyadicCover) -> DyadicCover:
    """Cell-set intersection; mixed levels re-grid the finer cover to the
    coarser one first (conservative)."""
    p, q = _common_grid(p, q)
    if p.is_empty or q.is_empty:
        return DyadicCover(p.dim, p.level, np.empty((0, p.dim), dtype=np.int64), p.base)
    mask = _rows_isin(p.cells, q.cells)
    return DyadicCover(p.dim, p.level, p.cells[mask], p.base)


def interior_run(cover: DyadicCover) -> int:
    """Length (in cells) of the longest run of consecutive occupied cells of
    a 1-dim cover; the cover then contains an interval of size
    run * width minus two boundary cells."""
    if cover.dim != 1:
        raise ValueError("interior_run expects a 1-dim cover")
    if cover.is_empty:
        return 0
    idx = np.sort(cover.cells[:, 0])
    breaks = np.flatnonzero(np.diff(idx) != 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [idx.size - 1]])
    return int(np.max(ends - starts + 1))
