"""Subspaces of R^2 and R^3, invariant sampling, orthogonal projections,
and a numerical check of the polar-coordinate integration formula

    int_{G(n,m)} int_V f dH^m dgamma = c(n,m) int |x|^{m-n} f(x) dx.

Only (n, m) in {(2,1), (3,1), (3,2)} are supported; the invariant measure
is normalized to a probability measure, so "positively many subspaces"
reads as a positive fraction of samples. Lines are parameterized by an
angle in [0, pi): a direction and its antipode are the same subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import DyadicCover, PointMeasure
from .rng import substream

SUPPORTED = {(2, 1), (3, 1), (3, 2)}

_ORTHO_TOL = 1e-12


class Subspace:
    """An m-dimensional linear subspace of R^n stored as an orthonormal basis
    (rows of `basis`)."""

    def __init__(self, n: int, m: int, basis):
        if (n, m) not in SUPPORTED:
            raise ValueError(f"unsupported Grassmannian ({n},{m}); supported: {sorted(SUPPORTED)}")
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if basis.shape != (m, n):
            raise ValueError(f"basis must be {m}x{n}, got {basis.shape}")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(m), atol=_ORTHO_TOL):
            raise ValueError("basis is not orthonormal to 1e-12")
        self.n = n
        self.m = m
        self.basis = basis

    # -- canonical constructions ------------------------------------------
    @classmethod
    def from_angle(cls, theta: float) -> "Subspace":
        """Line in the plane at angle theta (taken mod pi)."""
        theta = float(theta) % math.pi
        return cls(2, 1, [[math.cos(theta), math.sin(theta)]])

    @property
    def angle(self) -> float:
        """Angle in [0, pi) of a planar line (round-trips with from_angle)."""
        if (self.n, self.m) != (2, 1):
            raise ValueError("angle is defined for lines in the plane only")
        x, y = self.basis[0]
        return math.atan2(y, x) % math.pi

    @classmethod
    def from_direction(cls, v) -> "Subspace":
        """Line in R^3 spanned by v (antipodes identified)."""
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(3, 1, v[None, :])

    @classmethod
    def from_normal(cls, normal) -> "Subspace":
        """Plane in R^3 orthogonal to `normal`, with a deterministic basis."""
        nrm = np.asarray(normal, dtype=float)
        nrm = nrm / np.linalg.norm(nrm)
        # complete with the coordinate axis least aligned with the normal
        k = int(np.argmin(np.abs(nrm)))
        e = np.zeros(3)
        e[k] = 1.0
        b1 = e - nrm * nrm[k]
        b1 /= np.linalg.norm(b1)
        b2 = np.cross(nrm, b1)
        return cls(3, 2, np.stack([b1, b2]))

    @property
    def normal(self) -> np.ndarray:
        """Unit normal of a plane in R^3."""
        if (self.n, self.m) != (3, 2):
            raise ValueError("normal is defined for planes in R^3 only")
        return np.cross(self.basis[0], self.basis[1])

    # -- serialization: "n m theta" or "n m x y z" -------------------------
    def serialize(self) -> str:
        if (self.n, self.m) == (2, 1):
            return f"2 1 {self.angle:.17g}"
        vec = self.basis[0] if self.m == 1 else self.normal
        return f"{self.n} {self.m} " + " ".join(f"{v:.17g}" for v in vec)

    @classmethod
    def deserialize(cls, text: str) -> "Subspace":
        parts = text.split()
        n, m = int(parts[0]), int(parts[1])
        if (n, m) == (2, 1):
            return cls.from_angle(float(parts[2]))
        vec = [float(v) for v in parts[2:5]]
        return cls.from_direction(vec) if m == 1 else cls.from_normal(vec)

    def __repr__(self) -> str:
        return f"Subspace({self.serialize()})"


@dataclass
class ProjectedMeasure:
    """Pushforward of a point measure under orthogonal projection; inner
    coordinates are taken in the subspace basis and total mass is preserved
    exactly."""

    subspace: Subspace
    inner: PointMeasure


def sample_subspaces(n: int, m: int, count: int, seed: int) -> list[Subspace]:
    """i.i.d. samples from the invariant probability measure on G(n,m).

    (2,1): uniform angle on [0, pi); (3,1): uniform direction on the sphere
    with antipodes identified; (3,2): plane orthogonal to a uniform normal.
    """
    if (n, m) not in SUPPORTED:
        raise ValueError(f"unsupported Grassmannian ({n},{m}); supported: {sorted(SUPPORTED)}")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = substream(seed, "grassmannian", n, m)
    out = []
    if (n, m) == (2, 1):
        for theta in rng.uniform(0.0, math.pi, size=count):
            out.append(Subspace.from_angle(theta))
        return out
    vecs = rng.normal(size=(count, 3))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    # antipodal identification: flip to the canonical hemisphere
    flip = vecs[:, 2] < 0
    flip |= (vecs[:, 2] == 0) & (vecs[:, 1] < 0)
    flip |= (vecs[:, 2] == 0) & (vecs[:, 1] == 0) & (vecs[:, 0] < 0)
    vecs[flip] *= -1.0
    for v in vecs:
        out.append(Subspace.from_direction(v) if m == 1 else Subspace.from_normal(v))
    return out


def project(mu: PointMeasure, v: Subspace) -> ProjectedMeasure:
    """Orthogonal projection pushforward: x -> (<x, b_1>, ..., <x, b_m>);
    weights and resolution are carried over unchanged."""
    if mu.dim != v.n:
        raise ValueError(f"measure dim {mu.dim} does not match ambient dim {v.n}")
    coords = mu.points @ v.basis.T
    return ProjectedMeasure(v, PointMeasure(v.m, coords, mu.weights.copy(), mu.resolution))


def project_cover(a: DyadicCover, v: Subspace, out_level: int | None = None) -> DyadicCover:
    """Conservative cover of P_V(A) on the dyadic grid of V at out_level.

    Each source cell's corners are projected and the bounding interval/box
    of the images is covered, so the result is a superset of the true
    projection. The output grid is dyadic regardless of the source base.
    """
    if a.dim != v.n:
        raise ValueError(f"cover dim {a.dim} does not match ambient dim {v.n}")
    if out_level is None:
        out_level = math.ceil(a.level * math.log2(a.base))
    if a.is_empty:
        return DyadicCover(v.m, out_level, np.empty((0, v.m), dtype=np.int64), 2)
    w = a.cell_width
    corners = np.stack(
        np.meshgrid(*([np.array([0.0, 1.0])] * a.dim), indexing="ij"), axis=-1
    ).reshape(-1, a.dim)
    # (cells, corners, m) inner coordinates
    pts = (a.cells[:, None, :] + corners[None, :, :]) * w
    proj = pts @ v.basis.T
    lo = proj.min(axis=1)
    hi = proj.max(axis=1)
    scale = 2.0**out_level
    lo_idx = np.floor(lo * scale).astype(np.int64)
    hi_idx = np.floor(hi * scale).astype(np.int64)
    if v.m == 1:
        spans = (hi_idx[:, 0] - lo_idx[:, 0] + 1)
        total = int(spans.sum())
        cells = np.repeat(lo_idx[:, 0], spans) + _ragged_arange(spans, total)
        return DyadicCover(1, out_level, cells[:, None], 2)
    # m == 2: fill index boxes
    out = []
    sx = hi_idx[:, 0] - lo_idx[:, 0] + 1
    sy = hi_idx[:, 1] - lo_idx[:, 1] + 1
    for lox, loy, nx, ny in zip(lo_idx[:, 0], lo_idx[:, 1], sx, sy):
        gx = np.arange(lox, lox + nx)
        gy = np.arange(loy, loy + ny)
        out.append(np.stack([np.repeat(gx, ny), np.tile(gy, nx)], axis=1))
    return DyadicCover(2, out_level, np.vstack(out), 2)


def _ragged_arange(spans: np.ndarray, total: int) -> np.ndarray:
    """Concatenation of arange(s) for each span s."""
    ends = np.cumsum(spans)
    starts = ends - spans
    idx = np.arange(total)
    return idx - np.repeat(starts, spans)


# ---------------------------------------------------------------------------
# polar formula check
# ---------------------------------------------------------------------------

@dataclass
class RadialTestFunction:
    """Radial test function from the fixed catalog, f(x) = profile(|x|)."""

    name: str
    profile: callable
    support_radius: float
    power: float | None = None  # exponent for truncated radial powers

    def integrable(self, n: int, m: int) -> bool:
        """Whether int |x|^{m-n} |f| converges (radial test at the origin)."""
        if self.power is None:
            return True
        # integrand ~ r^{m-n} * r^power * r^{n-1} = r^{power + m - 1} near 0
        return self.power + m - 1 > -1


def _gaussian(scale: float):
    return lambda r: np.exp(-math.pi * (r / scale) ** 2)


CATALOG: dict[str, RadialTestFunction] = {
    "gauss": RadialTestFunction("gauss", _gaussian(1.0), 6.0),
    "gauss-wide": RadialTestFunction("gauss-wide", _gaussian(2.0), 12.0),
    "gauss-narrow": RadialTestFunction("gauss-narrow", _gaussian(0.5), 3.0),
    "ball": RadialTestFunction("ball", lambda r: (r <= 1.0).astype(float), 1.0, power=0.0),
    "rpow-half": RadialTestFunction("rpow-half", lambda r: np.where(r <= 1.0, np.sqrt(np.maximum(r, 0.0)), 0.0), 1.0, power=0.5),
    "rpow-neg": RadialTestFunction(
        "rpow-neg", lambda r: np.where((r > 0) & (r <= 1.0), np.maximum(r, 1e-300) ** -1.5, 0.0), 1.0, power=-1.5
    ),
    "zero": RadialTestFunction("zero", lambda r: np.zeros_like(r), 1.0),
}

_SPHERE_AREA = {2: 2.0 * math.pi, 3: 4.0 * math.pi}  # |S^{n-1}|


@dataclass
class PolarCheckResult:
    lhs: float
    rhs: float
    ratio: float
    n: int
    m: int
    function: str
    subspace_samples: int


def polar_formula_check(
    f: str, n: int, m: int, line_samples: int, quadrature_step: float, seed: int
) -> PolarCheckResult:
    """Monte Carlo + quadrature check of the polar-coordinate formula.

    lhs averages the midpoint-rule integral of f over sampled subspaces
    (evaluated in ambient coordinates, so it exercises the sampler);
    rhs integrates |x|^{m-n} f(x) over R^n, reduced to a radial integral
    since every catalog function is radial. The ratio estimates the
    normalization constant c(n,m).
    """
    if f not in CATALOG:
        raise ValueError(f"unknown catalog function {f!r}; have {sorted(CATALOG)}")
    fun = CATALOG[f]
    if not fun.integrable(n, m):
        raise ValueError(f"catalog function {f!r} is not |x|^(m-n)-integrable for (n,m)=({n},{m})")
    if quadrature_step <= 0:
        raise ValueError("quadrature_step must be positive")
    subspaces = sample_subspaces(n, m, line_samples, seed)
    r_max = fun.support_radius
    h = quadrature_step
    t = np.arange(-r_max, r_max, h) + h / 2.0
    if m == 1:
        grid = t[:, None]
    else:
        grid = np.stack([np.repeat(t, t.size), np.tile(t, t.size)], axis=1)
    vals = []
    for v in subspaces:
        ambient = grid @ v.basis
        r = np.sqrt(np.sum(ambient**2, axis=1))
        vals.append(float(np.sum(fun.profile(r)) * h**m))
    lhs = float(np.mean(vals))
    # radial reduction: int |x|^{m-n} f = |S^{n-1}| int_0^inf r^{m-1} f(r) dr
    rr = np.arange(0.0, r_max, h) + h / 2.0
    rhs = _SPHERE_AREA[n] * float(np.sum(rr ** (m - 1) * fun.profile(rr)) * h)
    ratio = lhs / rhs if rhs != 0 else math.nan
    return PolarCheckResult(lhs, rhs, ratio, n, m, f, line_samples)
