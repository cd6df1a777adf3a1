"""Discrete stand-ins for compact sets and finite Borel measures.

Sets are grid covers: the occupied cells of a uniform grid at a fixed level
(cell width base**-level, dyadic by default; self-similar generators may use
their natural base). Measures are finitely supported weighted point sets with
an explicit resolution below which they carry no information.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .rng import substream


def _pack_rows(cells: np.ndarray, lo: np.ndarray, spans: np.ndarray) -> np.ndarray | None:
    """Lex-order-preserving int64 keys for integer rows within the given
    bounding box, or None when the box is too large to pack."""
    total = 1
    for s in spans:
        total *= int(s)
        if total >= 2**62:
            return None
    key = (cells[:, 0] - lo[0]).astype(np.int64)
    for j in range(1, cells.shape[1]):
        key = key * int(spans[j]) + (cells[:, j] - lo[j])
    return key


def _rows_unique(cells: np.ndarray) -> np.ndarray:
    """Canonical cell array: unique rows, lexicographically sorted."""
    cells = np.ascontiguousarray(np.asarray(cells, dtype=np.int64))
    if cells.ndim == 1:
        cells = cells[:, None]
    if cells.shape[0] == 0:
        return cells.reshape(0, cells.shape[1] if cells.ndim == 2 else 1)
    if cells.shape[1] == 1:
        return np.unique(cells[:, 0])[:, None]
    lo = cells.min(axis=0)
    spans = cells.max(axis=0) - lo + 1
    key = _pack_rows(cells, lo, spans)
    if key is None:
        return np.unique(cells, axis=0)
    _, idx = np.unique(key, return_index=True)
    return cells[idx]


def _rows_isin(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise membership of a's rows in b's rows."""
    if a.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    if b.shape[0] == 0:
        return np.zeros(a.shape[0], dtype=bool)
    if a.shape[1] == 1:
        return np.isin(a[:, 0], b[:, 0])
    lo = np.minimum(a.min(axis=0), b.min(axis=0))
    spans = np.maximum(a.max(axis=0), b.max(axis=0)) - lo + 1
    ka = _pack_rows(a, lo, spans)
    kb = _pack_rows(b, lo, spans)
    if ka is None:
        va = a.view([("", a.dtype)] * a.shape[1]).ravel()
        vb = np.ascontiguousarray(b).view([("", b.dtype)] * b.shape[1]).ravel()
        return np.isin(va, vb)
    return np.isin(ka, kb)


class DyadicCover:
    """Occupied cells of a uniform grid at a fixed level.

    Cell c covers the half-open box prod_i [c_i * w, (c_i + 1) * w) with
    w = base**-level. base is 2 unless a generator with another natural
    grid (e.g. ternary Cantor sets) produced the cover; covers only combine
    with covers on the same grid.
    """

    def __init__(self, dim: int, level: int, cells, base: int = 2):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if level < 0:
            raise ValueError("level must be >= 0")
        if base < 2:
            raise ValueError("base must be >= 2")
        self.dim = int(dim)
        self.level = int(level)
        self.base = int(base)
        self.cells = _rows_unique(cells)
        if self.cells.shape[0] and self.cells.shape[1] != self.dim:
            raise ValueError(f"cells have dim {self.cells.shape[1]}, expected {self.dim}")
        if self.cells.shape[0] == 0:
            self.cells = self.cells.reshape(0, self.dim)

    # -- basic queries ---------------------------------------------------
    @property
    def count(self) -> int:
        return self.cells.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.cells.shape[0] == 0

    @property
    def cell_width(self) -> float:
        return float(self.base) ** (-self.level)

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DyadicCover)
            and (self.dim, self.level, self.base) == (other.dim, other.level, other.base)
            and self.cells.shape == other.cells.shape
            and bool(np.all(self.cells == other.cells))
        )

    def __repr__(self) -> str:
        return f"DyadicCover(dim={self.dim}, level={self.level}, base={self.base}, count={self.count})"

    def centers(self) -> np.ndarray:
        return (self.cells + 0.5) * self.cell_width

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Whether each point falls in an occupied cell."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.floor(points * self.base**self.level).astype(np.int64)
        return _rows_isin(idx, self.cells)

    # -- level changes ---------------------------------------------------
    def refine(self, levels: int = 1) -> "DyadicCover":
        """Replace each cell by its base**dim children, `levels` times."""
        if levels < 0:
            raise ValueError("levels must be >= 0")
        cells = self.cells
        for _ in range(levels):
            n = cells.shape[0]
            offs = np.stack(
                np.meshgrid(*([np.arange(self.base)] * self.dim), indexing="ij"), axis=-1
            ).reshape(-1, self.dim)
            cells = (cells[:, None, :] * self.base + offs[None, :, :]).reshape(n * offs.shape[0], self.dim)
        return DyadicCover(self.dim, self.level + levels, cells, self.base)

    def coarsen(self, levels: int = 1) -> "DyadicCover":
        if levels < 0 or levels > self.level:
            raise ValueError("cannot coarsen below level 0")
        cells = np.floor_divide(self.cells, self.base**levels)
        return DyadicCover(self.dim, self.level - levels, cells, self.base)

    def at_level(self, level: int) -> "DyadicCover":
        """Exact refinement or conservative coarsening to `level`."""
        if level >= self.level:
            return self.refine(level - self.level)
        return self.coarsen(self.level - level)

    # -- construction ----------------------------------------------------
    @classmethod
    def from_points(cls, points, level: int, base: int = 2, pad: int = 0) -> "DyadicCover":
        """Cover of a point set; pad dilates by that many cells per axis."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        dim = points.shape[1]
        cells = np.floor(points * float(base) ** level).astype(np.int64)
        if pad:
            r = np.arange(-pad, pad + 1)
            offs = np.stack(np.meshgrid(*([r] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
            cells = (cells[:, None, :] + offs[None, :, :]).reshape(-1, dim)
        return cls(dim, level, cells, base)

    # -- serialization ---------------------------------------------------
    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"level {self.level}\n")
        if self.base != 2:
            buf.write(f"base {self.base}\n")
        for row in self.cells:
            buf.write(" ".join(str(int(v)) for v in row))
            buf.write("\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "DyadicCover":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("level "):
            raise ValueError("cover text must start with 'level k'")
        level = int(lines[0].split()[1])
        base = 2
        body = lines[1:]
        if body and body[0].startswith("base "):
            base = int(body[0].split()[1])
            body = body[1:]
        if not body:
            raise ValueError("cover text has no cells")
        cells = np.array([[int(v) for v in ln.split()] for ln in body], dtype=np.int64)
        return cls(cells.shape[1], level, cells, base)


def union_covers(a: DyadicCover, b: DyadicCover) -> DyadicCover:
    """Union at the coarser of the two levels (conservative re-gridding)."""
    a, b = _common_grid(a, b)
    return DyadicCover(a.dim, a.level, np.vstack([a.cells, b.cells]), a.base)


def _common_grid(a: DyadicCover, b: DyadicCover) -> tuple[DyadicCover, DyadicCover]:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.base != b.base:
        raise ValueError(f"grid base mismatch: {a.base} vs {b.base}")
    level = min(a.level, b.level)
    return a.at_level(level), b.at_level(level)


@dataclass
class PointMeasure:
    """Finitely supported weighted point set approximating a Borel measure.

    resolution is the spatial scale below which the approximation is not
    meaningful; kernel and ball computations clamp at it.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray
    resolution: float

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.points.shape[1] != self.dim:
            raise ValueError(f"points have dim {self.points.shape[1]}, expected {self.dim}")
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("points and weights must have equal length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        total = float(self.weights.sum())
        if not np.isfinite(total) or total <= 0:
            raise ValueError("total mass must be finite and positive")
        if not (self.resolution > 0):
            raise ValueError("resolution must be positive")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def support_size(self) -> int:
        return self.points.shape[0]

    def translated(self, shift) -> "PointMeasure":
        return PointMeasure(self.dim, self.points + np.asarray(shift, dtype=float), self.weights, self.resolution)

    def rotated(self, rotation: np.ndarray) -> "PointMeasure":
        return PointMeasure(self.dim, self.points @ np.asarray(rotation, dtype=float).T, self.weights, self.resolution)

    # CSV: x[,y[,z]],w with header
    def to_csv(self) -> str:
        cols = ["x", "y", "z"][: self.dim] + ["w"]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for p, w in zip(self.points, self.weights):
            buf.write(",".join(f"{v:.17g}" for v in p) + f",{w:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, resolution: float) -> "PointMeasure":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split(",")
        dim = len(header) - 1
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
        return cls(dim, data[:, :dim], data[:, dim], resolution)


@dataclass
class FrostmanReport:
    """Result of sampling mu(B(x, r)) / r**s over balls.

    sup_at_min_radius marks that the supremum was attained at the smallest
    sampled radius, the signature of an atom-driven blow-up.
    """

    exponent: float
    sup_ratio: float
    samples: int
    sup_at_min_radius: bool = field(default=False)

    def __post_init__(self):
        if self.sup_ratio < 0:
            raise ValueError("sup_ratio must be non-negative")


# ---------------------------------------------------------------------------
# generators and measure constructions
# ---------------------------------------------------------------------------

def cantor_digit_set(base: int, digits, level: int, dim: int = 1) -> DyadicCover:
    """Level-`level` cover of the self-similar set with contraction 1/base
    and the given digit translations, on its natural base-`base` grid.

    Cell count is len(digits)**level.
    """
    if base < 2:
        raise ValueError("base must be >= 2")
    if dim != 1:
        raise ValueError("cantor_digit_set generates 1-dim covers; take products for higher dim")
    digits = sorted(set(int(d) for d in digits))
    if not digits:
        raise ValueError("digit set must be non-empty")
    if digits[0] < 0 or digits[-1] >= base:
        raise ValueError(f"digits must lie in [0, {base})")
    if level < 0:
        raise ValueError("level must be >= 0")
    idx = np.zeros(1, dtype=np.int64)
    d = np.asarray(digits, dtype=np.int64)
    for _ in range(level):
        idx = (idx[:, None] * base + d[None, :]).ravel()
    return DyadicCover(1, level, idx[:, None], base)


def product_cover(a: DyadicCover, b: DyadicCover) -> DyadicCover:
    """Cartesian product of two 1-dim covers (cell count multiplies)."""
    if a.dim != 1 or b.dim != 1:
        raise ValueError("product_cover expects 1-dim covers")
    if a.base != b.base:
        raise ValueError(f"grid base mismatch: {a.base} vs {b.base}")
    if a.level != b.level:
        # re-grid the coarser one (exact refinement)
        level = max(a.level, b.level)
        a, b = a.at_level(level), b.at_level(level)
    if a.level != b.level:
        raise ValueError("levels must match after re-gridding")
    ai = a.cells[:, 0]
    bi = b.cells[:, 0]
    cells = np.stack(
        [np.repeat(ai, bi.size), np.tile(bi, ai.size)], axis=1
    )
    return DyadicCover(2, a.level, cells, a.base)


def natural_measure(cover: DyadicCover) -> PointMeasure:
    """Equal mass at each cell center, total mass 1, resolution = cell width."""
    if cover.is_empty:
        raise ValueError("cannot build the natural measure of an empty cover")
    n = cover.count
    return PointMeasure(cover.dim, cover.centers(), np.full(n, 1.0 / n), cover.cell_width)


def frostman_check(mu: PointMeasure, s: float, ball_samples: int, seed: int) -> FrostmanReport:
    """Sample sup of mu(B(x, r)) / r**s with x on the support and r log-uniform
    in [resolution, diameter]. Deterministic given the seed.

    The diameter is taken as the bounding-box diagonal (an upper bound for
    the true diameter, so the radius range is never truncated).
    """
    if s <= 0:
        raise ValueError("exponent s must be positive")
    if ball_samples < 1:
        raise ValueError("ball_samples must be >= 1")
    rng = substream(seed, "frostman")
    pts = mu.points
    span = pts.max(axis=0) - pts.min(axis=0)
    diam = float(np.sqrt(np.sum(span**2)))
    r_lo = mu.resolution
    r_hi = max(diam, r_lo * 2)
    centers = pts[rng.integers(0, pts.shape[0], size=ball_samples)]
    radii = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), size=ball_samples))
    d = np.sqrt(np.sum((centers[:, None, :] - pts[None, :, :]) ** 2, axis=2))
    masses = np.sum(np.where(d <= radii[:, None], mu.weights[None, :], 0.0), axis=1)
    ratios = masses / radii**s
    k = int(np.argmax(ratios))
    at_min = bool(radii[k] <= r_lo * (r_hi / r_lo) ** (1.0 / max(ball_samples, 20)))
    return FrostmanReport(exponent=float(s), sup_ratio=float(ratios[k]), samples=ball_samples, sup_at_min_radius=at_min)
