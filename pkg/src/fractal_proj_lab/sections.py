"""Plane sections and radial visibility.

Slices replace the measure-theoretic sections A ∩ (V + x) with cells of a
cover within a stated thickness of the affine plane, re-coordinatized in
the plane's basis; the typical slice of an s-dimensional planar set by a
line has box-count slope near s - 1, and the upper bound s - m holds for
every base point.

Visibility uses full lines (antipodal directions identified, matching the
invariant line measure): a point sees the set if a positive fraction of
sampled directions pass within delta of an occupied cell. A single tiny
cell is hit by an O(delta) fraction of directions, so "visible" is always
relative to the set's native scale; this degenerate rate is reported, not
special-cased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import intervals
from .grassmannian import Subspace
from .measures import DyadicCover, PointMeasure, natural_measure
from .rng import substream
from .scaling import ScalingFit, box_dimension


@dataclass
class SliceSpec:
    """An affine slice: plane V + x (dim(V) = n - m) thickened to delta."""

    base_point: np.ndarray
    subspace: Subspace
    thickness: float

    def __post_init__(self):
        self.base_point = np.asarray(self.base_point, dtype=float).ravel()
        if self.base_point.size != self.subspace.n:
            raise ValueError("base point dimension must match the ambient dimension")
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")


def slice_cover(a: DyadicCover, spec: SliceSpec) -> DyadicCover:
    """Cells of `a` within the slab of full width `thickness` around the
    affine plane, re-coordinatized in the plane's basis (same level and grid
    base, one cell of padding along the plane).

    Superset guarantee: any point of a covered cell within thickness/2 of
    the plane lands in the returned cover.
    """
    v = spec.subspace
    if a.dim != v.n:
        raise ValueError(f"cover dim {a.dim} does not match ambient dim {v.n}")
    w = a.cell_width
    if spec.thickness < w:
        raise ValueError(f"thickness {spec.thickness:.3g} below the cover scale {w:.3g}")
    if a.is_empty:
        return DyadicCover(v.m, a.level, np.empty((0, v.m), dtype=np.int64), a.base)
    centers = a.centers() - spec.base_point
    # distance to the plane = norm of the component orthogonal to V
    tangential = centers @ v.basis.T
    normal_sq = np.sum(centers**2, axis=1) - np.sum(tangential**2, axis=1)
    cell_radius = 0.5 * w * math.sqrt(a.dim)
    keep = np.sqrt(np.maximum(normal_sq, 0.0)) <= 0.5 * spec.thickness + cell_radius
    if not np.any(keep):
        return DyadicCover(v.m, a.level, np.empty((0, v.m), dtype=np.int64), a.base)
    coords = tangential[keep]
    return DyadicCover.from_points(coords, a.level, base=a.base, pad=1)


@dataclass
class SliceSurvey:
    slopes: np.ndarray
    nonempty_fraction: float
    base_points: np.ndarray
    angles: np.ndarray
    counts: np.ndarray

    @property
    def median_slope(self) -> float:
        return float(np.median(self.slopes)) if self.slopes.size else math.nan

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.slopes, q)) if self.slopes.size else math.nan


def slice_dimension_survey(
    a: DyadicCover,
    base_points: np.ndarray,
    v_samples: int,
    levels: tuple[int, int] | None = None,
    seed: int = 0,
    thickness: float | None = None,
) -> SliceSurvey:
    """Box-count slopes of line slices of a planar cover through the given
    base points, over v_samples directions each.

    Aggregates the per-slice fits (slope of log2 count against level) and
    the fraction of nonempty slices. Typical slopes of an s-dimensional set
    sit near s - 1; Prop-style upper bounds cap them at dim(A) - 1 for any
    base point.
    """
    if a.dim != 2:
        raise ValueError("the survey runs on planar covers")
    base_points = np.atleast_2d(np.asarray(base_points, dtype=float))
    if thickness is None:
        thickness = a.cell_width
    if thickness < a.cell_width:
        raise ValueError(f"thickness {thickness:.3g} below the cover scale {a.cell_width:.3g}")
    if levels is None:
        levels = (1, a.level - 1)
    lo, hi = levels
    rng = substream(seed, "slice-survey")
    slopes, x_rec, t_rec, c_rec = [], [], [], []
    nonempty = 0
    total = 0
    centers = a.centers()
    w = a.cell_width
    slab = 0.5 * thickness + 0.5 * w * math.sqrt(2.0)
    for x in base_points:
        rel = centers - x
        rel_sq = np.einsum("ij,ij->i", rel, rel)
        thetas = rng.uniform(0.0, math.pi, size=v_samples)
        for theta in thetas:
            total += 1
            tang = rel[:, 0] * math.cos(theta) + rel[:, 1] * math.sin(theta)
            keep = rel_sq - tang**2 <= slab**2
            if not np.any(keep):
                continue
            sc = DyadicCover.from_points(tang[keep, None], a.level, base=a.base, pad=1)
            nonempty += 1
            fit = box_dimension(sc, lo, hi)
            slopes.append(fit.slope)
            x_rec.append(x)
            t_rec.append(theta)
            c_rec.append(sc.count)
    return SliceSurvey(
        slopes=np.asarray(slopes, dtype=float),
        nonempty_fraction=nonempty / total if total else 0.0,
        base_points=np.asarray(x_rec, dtype=float).reshape(-1, 2),
        angles=np.asarray(t_rec, dtype=float),
        counts=np.asarray(c_rec, dtype=np.int64),
    )


def sample_base_points(a: DyadicCover, count: int, seed: int) -> np.ndarray:
    """Base points drawn from the natural measure of the cover (cell centers
    with equal weights), matching the almost-every-base-point setting the
    typical-slice statistics live in."""
    mu = natural_measure(a)
    rng = substream(seed, "slice-base-points")
    idx = rng.integers(0, mu.support_size, size=count)
    return mu.points[idx]


# ---------------------------------------------------------------------------
# visibility
# ---------------------------------------------------------------------------

@dataclass
class VisibilityResult:
    fraction: float
    inside: bool


@dataclass
class VisibilityField:
    """Per-grid-point fraction of sampled directions whose line through the
    point meets the set's delta-cover."""

    xs: np.ndarray
    ys: np.ndarray
    fractions: np.ndarray  # shape (len(ys), len(xs))

    def __post_init__(self):
        f = self.fractions
        if np.any((f < 0) | (f > 1)):
            raise ValueError("fractions must lie in [0, 1]")

    @property
    def positive_fraction(self) -> float:
        return float(np.mean(self.fractions > 0))


def _angular_cover(a: DyadicCover, x: np.ndarray, delta: float):
    """Merged angular intervals (mod pi) of directions whose line through x
    passes within delta of an occupied cell center."""
    centers = a.centers() - x
    d = np.sqrt(np.sum(centers**2, axis=1))
    phi = np.arctan2(centers[:, 1], centers[:, 0]) % math.pi
    half = np.arcsin(np.minimum(1.0, delta / np.maximum(d, delta)))
    lo, hi = phi - half, phi + half
    # unwrap across 0 and pi
    los = [lo, lo + math.pi, lo - math.pi]
    his = [hi, hi + math.pi, hi - math.pi]
    return intervals.merge(np.concatenate(los), np.concatenate(his))


def visibility_fraction(
    a: DyadicCover, x, direction_samples: int, delta: float, seed: int
) -> VisibilityResult:
    """Fraction of sampled full lines through x (antipodal directions
    identified, matching the invariant line measure) that intersect the
    delta-cover of the set. Planar sets use a merged angular cover; sets
    in R^3 test line distances directly.

    A base point inside an occupied cell returns fraction 1 with the
    `inside` flag set.
    """
    x = np.asarray(x, dtype=float).ravel()
    if a.dim not in (2, 3) or x.size != a.dim:
        raise ValueError("visibility runs on covers in the plane or in R^3")
    if delta < a.cell_width:
        raise ValueError(f"delta {delta:.3g} below the cover scale {a.cell_width:.3g}")
    if direction_samples < 1:
        raise ValueError("direction_samples must be >= 1")
    if a.contains_points(x[None, :])[0]:
        return VisibilityResult(fraction=1.0, inside=True)
    if a.is_empty:
        return VisibilityResult(fraction=0.0, inside=False)
    rng = substream(
        seed, "visibility", *(int(round(c * 1e9)) & 0xFFFFFFFF for c in x)
    )
    if a.dim == 2:
        lo, hi = _angular_cover(a, x, delta)
        thetas = rng.uniform(0.0, math.pi, size=direction_samples)
        hits = intervals.contains(lo, hi, thetas)
        return VisibilityResult(fraction=float(np.mean(hits)), inside=False)
    dirs = rng.normal(size=(direction_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rel = a.centers() - x
    rel_sq = np.einsum("ij,ij->i", rel, rel)
    hit = np.zeros(direction_samples, dtype=bool)
    for i, e in enumerate(dirs):
        t = rel @ e
        hit[i] = bool(np.any(rel_sq - t**2 <= delta**2))
    return VisibilityResult(fraction=float(np.mean(hit)), inside=False)


@dataclass
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid node coordinates, offset to cell centers so nodes rarely
        coincide with the target set's grid."""
        xs = self.xmin + (np.arange(self.nx) + 0.5) * (self.xmax - self.xmin) / self.nx
        ys = self.ymin + (np.arange(self.ny) + 0.5) * (self.ymax - self.ymin) / self.ny
        return xs, ys


def visibility_map(
    a: DyadicCover, grid: GridSpec, direction_samples: int, delta: float, seed: int
) -> VisibilityField:
    """visibility_fraction evaluated on every grid point; deterministic per
    (seed, point index), so the evaluation order does not matter."""
    xs, ys = grid.points()
    frac = np.zeros((ys.size, xs.size))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            res = visibility_fraction(a, (x, y), direction_samples, delta, seed)
            frac[j, i] = res.fraction
    return VisibilityField(xs=xs, ys=ys, fractions=frac)


def render_svg_heatmap(field: VisibilityField, path: str, cell_px: int = 8) -> None:
    """Self-contained SVG heat map: one rectangle per grid point, colored by
    its visibility fraction (dark blue 0 to yellow 1)."""
    nx, ny = field.xs.size, field.ys.size
    w, h = nx * cell_px, ny * cell_px
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="#20124d"/>',
    ]
    for j in range(ny):
        for i in range(nx):
            f = field.fractions[j, i]
            r = int(40 + 215 * f)
            g = int(20 + 200 * f)
            b = int(90 + 40 * (1 - f))
            # y axis points up: row 0 is drawn at the bottom
            parts.append(
                f'<rect x="{i * cell_px}" y="{(ny - 1 - j) * cell_px}" '
                f'width="{cell_px}" height="{cell_px}" fill="rgb({r},{g},{b})"/>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf8") as fh:
        fh.write("\n".join(parts))
