"""Arithmetic Cantor construction whose projections miss a line family.

The construction lives on the grids {k / n**rho}. Its engine is an exact
integer fact: with K1 = floor(n**r), K2 = floor(n**(1-r)), KB = floor(n**(2r-1)),
every product j*k with j <= K2, k <= KB lands back in {1..K1}, so the sums
{1..K1} + {products} occupy at most 2*K1 - 1 points of the 1/n**r grid.
Thickening each grid point by n**-r_prime with r_prime > r makes the total
cover length ~ n**(r - r_prime), which a schedule of rapidly growing n drives
to zero while the generating sets keep their target dimensions.

The projective involution (x, y) -> (x, 1) / y turns the shrinking sumset
into a planar pair A (pullback of a product set) and B (on the x-axis) whose
orthogonal projections are disjoint except for directions with slope in the
sumset cover; the disjointness experiment measures exactly that.

All certificates (product inclusion, distinct-sum counts) are computed in
exact integer arithmetic; interval endpoints use floats only for reporting
and cover geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import intervals
from .grassmannian import Subspace, project_cover
from .measures import DyadicCover
from .rng import substream
from .scaling import intersect_covers

PRODUCT_ENUM_CAP = 50_000_000
INTERVAL_CAP = 2_000_000


class CertificateError(ValueError):
    """An exact certificate failed (parameter regime violated)."""


class ScheduleTooSlow(ValueError):
    """Stage growth too slow: the certified cover bound did not shrink."""


class TooManyIntervals(ValueError):
    """Materializing this stage would exceed the interval cap."""


# ---------------------------------------------------------------------------
# exact powers
# ---------------------------------------------------------------------------

def _iroot(x: int, q: int) -> int:
    """floor(x ** (1/q)) for non-negative integers, exactly (Newton on
    big ints, so arbitrarily large powers are fine)."""
    if x < 0 or q < 1:
        raise ValueError("invalid root")
    if x in (0, 1) or q == 1:
        return x
    k = 1 << ((x.bit_length() + q - 1) // q)
    while True:
        t = ((q - 1) * k + x // k ** (q - 1)) // q
        if t >= k:
            break
        k = t
    while k**q > x:
        k -= 1
    while (k + 1) ** q <= x:
        k += 1
    return k


def floor_power(n: int, rho) -> int:
    """floor(n ** rho); exact for rational rho, guarded against float
    representation error otherwise."""
    if isinstance(rho, Fraction):
        return _iroot(n ** rho.numerator, rho.denominator)
    v = float(n) ** float(rho)
    return int(math.floor(v * (1.0 + 1e-12) + 1e-9))


def exact_power(n: int, rho):
    """n ** rho as an exact int when rho is rational and the power is
    integral, else None."""
    if not isinstance(rho, Fraction):
        return None
    k = _iroot(n ** rho.numerator, rho.denominator)
    return k if k**rho.denominator == n**rho.numerator else None


def _as_exponent(x):
    """Normalize a user exponent to Fraction when it is one."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float) and x == round(x * 1024) / 1024:
        # dyadic floats (2.0, 1.375, ...) are exact user intents
        return Fraction(x).limit_denominator(4096)
    return float(x)


# ---------------------------------------------------------------------------
# stage parameters and first-stage sets
# ---------------------------------------------------------------------------

@dataclass
class StageParams:
    """One stage of the construction: grid size n, target exponent s in
    (1, 2) with r = 1/s, and neighbourhood exponent r_prime > r."""

    n: int
    s: object
    r_prime: object
    r: object = field(init=False)
    k1: int = field(init=False)
    k2: int = field(init=False)
    kb: int = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        self.s = _as_exponent(self.s)
        self.r_prime = _as_exponent(self.r_prime)
        s_val = float(self.s)
        if not (1.0 < s_val < 2.0):
            raise ValueError(f"s must lie in (1, 2), got {self.s}")
        self.r = 1 / self.s if isinstance(self.s, Fraction) else 1.0 / s_val
        if not (float(self.r_prime) > float(self.r)):
            raise ValueError(f"r_prime must exceed r = {float(self.r):.6g}")
        self.k1 = floor_power(self.n, self.r)
        self.k2 = floor_power(self.n, self._one_minus_r)
        self.kb = floor_power(self.n, self._two_r_minus_one)
        if self.k2 > self.k1:
            raise ValueError(f"parameter regime violated: K2 = {self.k2} > K1 = {self.k1}")
        if self.kb < 1:
            raise ValueError("n too small: floor(n**(2r-1)) = 0")

    @property
    def _one_minus_r(self):
        return 1 - self.r if isinstance(self.r, Fraction) else 1.0 - self.r

    @property
    def _two_r_minus_one(self):
        return 2 * self.r - 1 if isinstance(self.r, Fraction) else 2.0 * self.r - 1.0

    @property
    def a1_denominator(self) -> float:
        return float(self.n) ** float(self.r)

    @property
    def a2_denominator(self) -> float:
        return float(self.n) ** float(self._one_minus_r)

    @property
    def b_denominator(self) -> float:
        return float(self.n) ** float(self._two_r_minus_one)

    @property
    def width(self) -> float:
        """Neighbourhood half-width n**-r_prime."""
        return float(self.n) ** (-float(self.r_prime))


@dataclass
class ArithmeticSet:
    """{k * n**-rho : k in numerators}; numerators are exact integers."""

    numerators: np.ndarray
    scale_exponent: object
    n: int

    def __post_init__(self):
        self.numerators = np.unique(np.asarray(self.numerators, dtype=np.int64))
        if self.numerators.size and self.numerators[0] < 1:
            raise ValueError("numerators must be positive")
        bound = floor_power(self.n, self.scale_exponent)
        if self.numerators.size and self.numerators[-1] > bound:
            raise ValueError(f"numerators exceed n**rho = {bound}")

    @property
    def denominator(self) -> float:
        return float(self.n) ** float(self.scale_exponent)

    def values(self) -> np.ndarray:
        return self.numerators / self.denominator


def first_stage(p: StageParams) -> tuple[ArithmeticSet, ArithmeticSet, ArithmeticSet]:
    """The three first-stage arithmetic sets:
    A1' = {1..K1}/n**r, A2' = {1..K2}/n**(1-r), B' = {1..KB}/n**(2r-1)."""
    a1 = ArithmeticSet(np.arange(1, p.k1 + 1), p.r, p.n)
    a2 = ArithmeticSet(np.arange(1, p.k2 + 1), p._one_minus_r, p.n)
    b = ArithmeticSet(np.arange(1, p.kb + 1), p._two_r_minus_one, p.n)
    return a1, a2, b


# ---------------------------------------------------------------------------
# exact certificates
# ---------------------------------------------------------------------------

@dataclass
class InclusionCertificate:
    """Exact record that A2' * B' lands in the A1' grid: products computed
    in integer arithmetic, ok iff every product is <= K1."""

    products: np.ndarray
    ok: bool
    max_product: int
    k1: int


def sum_product_inclusion(a2: ArithmeticSet, b: ArithmeticSet, p: StageParams) -> InclusionCertificate:
    """Compute {j*k : j in A2' numerators, k in B' numerators} exactly and
    certify the inclusion into {1..K1}. No floating point is involved."""
    size = a2.numerators.size * b.numerators.size
    if size > PRODUCT_ENUM_CAP:
        raise ValueError(f"product enumeration of size {size} exceeds the cap {PRODUCT_ENUM_CAP}")
    prods = np.unique(np.multiply.outer(a2.numerators, b.numerators).ravel())
    max_product = int(prods[-1]) if prods.size else 0
    return InclusionCertificate(products=prods, ok=bool(max_product <= p.k1), max_product=max_product, k1=p.k1)


@dataclass
class SumsetCertificate:
    """Distinct sums of A1' numerators and the product set, as merged integer
    runs [lo, hi]; count is certified <= 2*K1 - 1."""

    count: int
    runs: np.ndarray  # (R, 2) inclusive integer runs
    bound: int


def sumset_cover_count(
    a1: ArithmeticSet, a2: ArithmeticSet, b: ArithmeticSet, p: StageParams
) -> SumsetCertificate:
    """Exact count of distinct sums a + jk over the first-stage sets.

    A1' numerators are the contiguous block 1..K1, so the sums are the union
    of the integer ranges [1 + prod, K1 + prod]; a sweep over the sorted
    distinct products merges them without materializing the sum set.
    """
    inc = sum_product_inclusion(a2, b, p)
    if not inc.ok:
        raise CertificateError(
            f"inclusion certificate failed: max product {inc.max_product} > K1 = {inc.k1}"
        )
    nums = a1.numerators
    contiguous = nums.size == p.k1 and nums[0] == 1 and nums[-1] == p.k1
    if not contiguous:
        # fall back to direct enumeration (small adversarial inputs)
        sums = np.unique(np.add.outer(nums, inc.products).ravel())
        runs = _int_runs(sums)
        count = int(sums.size)
    else:
        span = int(nums[-1] - nums[0])  # ranges have length span + 1
        starts = inc.products + int(nums[0])
        runs_list = []
        run_lo = int(starts[0])
        run_hi = int(starts[0]) + span
        for st in starts[1:]:
            st = int(st)
            if st <= run_hi + 1:
                run_hi = max(run_hi, st + span)
            else:
                runs_list.append((run_lo, run_hi))
                run_lo, run_hi = st, st + span
        runs_list.append((run_lo, run_hi))
        runs = np.asarray(runs_list, dtype=np.int64)
        count = int(np.sum(runs[:, 1] - runs[:, 0] + 1))
    bound = 2 * p.k1 - 1
    if count > bound:
        raise CertificateError(f"distinct sum count {count} exceeds the certified bound {bound}")
    return SumsetCertificate(count=count, runs=runs, bound=bound)


def _int_runs(sorted_ints: np.ndarray) -> np.ndarray:
    if sorted_ints.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    breaks = np.flatnonzero(np.diff(sorted_ints) != 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [sorted_ints.size - 1]])
    return np.stack([sorted_ints[starts], sorted_ints[ends]], axis=1)


def _cover_slop(p: StageParams) -> float:
    """Conservative half-width of the sumset cover around each grid point:
    interval arithmetic over a1 + b*a2 with all three sets thickened by w."""
    w = p.width
    return w * (1.0 + p.k2 / p.a2_denominator + p.kb / p.b_denominator + w)


def first_stage_cover_measure(p: StageParams, cert: SumsetCertificate) -> float:
    """Certified length of the cover of A1 + B*A2 (first-stage neighbourhoods
    at n**-r_prime) built on the 1/n**r grid from the distinct-sum runs."""
    slop = _cover_slop(p)
    inv_p = 1.0 / p.a1_denominator
    length = 0.0
    prev_hi = -math.inf
    for lo, hi in cert.runs:
        # consecutive grid points merge when the gap is within the slop
        if inv_p <= 2.0 * slop:
            seg_lo, seg_hi = lo * inv_p - slop, hi * inv_p + slop
        else:
            length += (hi - lo + 1) * 2.0 * slop
            continue
        seg_lo = max(seg_lo, prev_hi)
        length += max(0.0, seg_hi - seg_lo)
        prev_hi = max(prev_hi, seg_hi)
    return length


def first_stage_cover_intervals(p: StageParams, cert: SumsetCertificate, cap: int = INTERVAL_CAP):
    """The same cover as explicit merged intervals (for experiments)."""
    total = int(np.sum(cert.runs[:, 1] - cert.runs[:, 0] + 1))
    if total > cap:
        raise TooManyIntervals(f"{total} sum points exceed the cap {cap}")
    pts = np.concatenate([np.arange(lo, hi + 1) for lo, hi in cert.runs])
    slop = _cover_slop(p)
    inv_p = 1.0 / p.a1_denominator
    return intervals.merge(pts * inv_p - slop, pts * inv_p + slop)


# ---------------------------------------------------------------------------
# iterated construction
# ---------------------------------------------------------------------------

@dataclass
class StageReport:
    params: StageParams
    inclusion: InclusionCertificate
    sumset: SumsetCertificate
    cover_bound: float
    a1_count: int
    a2_count: int
    b_count: int


class ConstructionState:
    """Finite-stage state of the iterated construction.

    A1 and A2 compose multiplicatively (a scaled copy of the next stage's
    first-stage set is placed in each constituent interval); B is the running
    intersection of the per-stage first-stage neighbourhoods. cover_bound is
    the certified length of the current stage's sum-product cover on its own
    grid, the per-stage quantity the schedule drives below 1/j.
    """

    def __init__(self, reports: list[StageReport], b_lo: np.ndarray, b_hi: np.ndarray):
        if not reports:
            raise ValueError("schedule must contain at least one stage")
        self.reports = reports
        self.b_lo = b_lo
        self.b_hi = b_hi
        self._a1_cache = None
        self._a2_cache = None

    # -- summary accessors -------------------------------------------------
    @property
    def stage(self) -> int:
        return len(self.reports)

    @property
    def schedule(self) -> list[StageParams]:
        return [r.params for r in self.reports]

    @property
    def cover_bounds(self) -> list[float]:
        return [r.cover_bound for r in self.reports]

    @property
    def cover_bound(self) -> float:
        return self.reports[-1].cover_bound

    @property
    def a1_count(self) -> int:
        return self.reports[-1].a1_count

    @property
    def a2_count(self) -> int:
        return self.reports[-1].a2_count

    @property
    def b_count(self) -> int:
        return self.reports[-1].b_count

    # -- interval materialization -------------------------------------------
    def _compose(self, pick_numerators, cap: int, truncate: bool = False):
        los = his = None
        stages_done = 0
        for rep in self.reports:
            p = rep.params
            nums, denom = pick_numerators(p)
            unit_lo = nums / denom - p.width
            unit_hi = nums / denom + p.width
            if los is None:
                los, his = unit_lo.copy(), unit_hi.copy()
                stages_done = 1
                continue
            if los.size * nums.size > cap:
                if truncate:
                    break
                raise TooManyIntervals(
                    f"stage would materialize {los.size * nums.size} intervals (cap {cap})"
                )
            length = his - los
            los, his = (
                (los[:, None] + length[:, None] * unit_lo[None, :]).ravel(),
                (los[:, None] + length[:, None] * unit_hi[None, :]).ravel(),
            )
            stages_done += 1
        return los, his, stages_done

    def _cached(self, attr: str, pick, cap: int, truncate: bool):
        cached = getattr(self, attr)
        if cached is None or (cached[2] < self.stage and not truncate):
            cached = self._compose(pick, cap, truncate)
            setattr(self, attr, cached)
        lo, hi, stages = cached
        if stages < self.stage and not truncate:
            raise TooManyIntervals(f"full materialization exceeds the cap {cap}")
        return lo, hi, stages

    def a1_intervals(self, cap: int = INTERVAL_CAP, truncate: bool = False):
        """Composed A1 intervals. With truncate=True the composition stops
        at the deepest stage prefix fitting the cap (deeper stages only
        refine within widths already far below any experiment resolution)
        and the result is (lo, hi, stages_materialized)."""
        lo, hi, stages = self._cached(
            "_a1_cache", lambda p: (np.arange(1, p.k1 + 1), p.a1_denominator), cap, truncate
        )
        return (lo, hi, stages) if truncate else (lo, hi)

    def a2_intervals(self, cap: int = INTERVAL_CAP, clamp: bool = True, truncate: bool = False):
        lo, hi, stages = self._cached(
            "_a2_cache", lambda p: (np.arange(1, p.k2 + 1), p.a2_denominator), cap, truncate
        )
        if clamp:
            # final clamp to [1/10, inf): the projective pullback needs a
            # positive lower bound on the second coordinate
            keep = hi >= 0.1
            lo, hi = np.maximum(lo[keep], 0.1), hi[keep]
        return (lo, hi, stages) if truncate else (lo, hi)

    def b_intervals(self):
        return self.b_lo, self.b_hi

    def sumset_cover(self, cap: int = INTERVAL_CAP):
        """Cover of the stage-1 sum-product structure A1 + B*A2 in absolute
        coordinates; a superset of the limit sumset since all three sets
        shrink stage over stage."""
        rep = self.reports[0]
        return first_stage_cover_intervals(rep.params, rep.sumset, cap)


def iterate_construction(schedule, enforce_targets: bool = False) -> ConstructionState:
    """Run certificates and composition over a schedule of StageParams (or
    (n, r_prime) pairs sharing the first stage's s).

    Raises ScheduleTooSlow when a stage's certified cover bound fails to
    shrink strictly (or to meet the 1/j target when enforce_targets is set).
    """
    params = _normalize_schedule(schedule)
    if not params:
        raise ValueError("schedule must contain at least one stage")
    rprimes = [float(p.r_prime) for p in params]
    if any(b >= a for a, b in zip(rprimes, rprimes[1:])):
        raise ValueError("r_prime must decrease strictly along the schedule")
    reports: list[StageReport] = []
    b_lo = b_hi = None
    a1_count = a2_count = 1
    prev_bound = math.inf
    for j, p in enumerate(params, start=1):
        a1, a2, b = first_stage(p)
        inc = sum_product_inclusion(a2, b, p)
        if not inc.ok:
            raise CertificateError(
                f"stage {j}: inclusion failed (max product {inc.max_product} > K1 {p.k1})"
            )
        cert = sumset_cover_count(a1, a2, b, p)
        bound = first_stage_cover_measure(p, cert)
        if bound >= prev_bound:
            raise ScheduleTooSlow(
                f"stage {j}: cover bound {bound:.6g} did not shrink below {prev_bound:.6g}; "
                "increase the stage's n"
            )
        if enforce_targets and bound > 1.0 / j:
            raise ScheduleTooSlow(
                f"stage {j}: cover bound {bound:.6g} misses the 1/{j} target; increase n"
            )
        prev_bound = bound
        a1_count *= p.k1
        a2_count *= p.k2
        stage_b_lo = b.values() - p.width
        stage_b_hi = b.values() + p.width
        if b_lo is None:
            b_lo, b_hi = stage_b_lo, stage_b_hi
        else:
            b_lo, b_hi = intervals.intersect(b_lo, b_hi, stage_b_lo, stage_b_hi)
        if b_lo.size == 0:
            raise ValueError(
                f"stage {j}: running intersection of B emptied; stage grids are incompatible"
            )
        reports.append(
            StageReport(
                params=p,
                inclusion=inc,
                sumset=cert,
                cover_bound=bound,
                a1_count=a1_count,
                a2_count=a2_count,
                b_count=int(b_lo.size),
            )
        )
    return ConstructionState(reports, b_lo, b_hi)


def _normalize_schedule(schedule) -> list[StageParams]:
    out = []
    s_shared = None
    for item in schedule:
        if isinstance(item, StageParams):
            out.append(item)
            s_shared = item.s
        else:
            n, rp = item
            if s_shared is None:
                raise ValueError("tuple schedules need a leading StageParams to fix s")
            out.append(StageParams(n=int(n), s=s_shared, r_prime=rp))
    return out


def default_schedule(n1: int, s, rprime1, stages: int, enforce_targets: bool = True) -> list[StageParams]:
    """Bound-driven schedule: r_prime_j = r + (rprime1 - r) / j, and each
    n_j is the smallest exact-grid power for which the certified cover bound
    both shrinks strictly and (by default) meets its 1/j target.
    """
    if stages < 1:
        raise ValueError("stages must be >= 1")
    first = StageParams(n=n1, s=s, r_prime=rprime1)
    params = [first]
    r = first.r
    if isinstance(r, Fraction):
        base = 2 ** r.denominator
    else:
        base = max(2, n1)
    gap1 = float(first.r_prime) - float(r)
    prev_bound = _stage_bound(first)
    if enforce_targets and prev_bound > 1.0:
        raise ScheduleTooSlow(f"stage 1 bound {prev_bound:.4g} exceeds 1; increase n1 or rprime1")
    k = max(1, round(math.log(n1, base)))
    for j in range(2, stages + 1):
        rp = _stage_rprime(r, gap1, j)
        found = None
        for kk in range(k + 1, k + 40):
            n = base**kk
            cand = StageParams(n=n, s=first.s, r_prime=rp)
            if cand.k2 * cand.kb > PRODUCT_ENUM_CAP:
                break
            bound = _stage_bound(cand)
            if bound < prev_bound and (not enforce_targets or bound <= 1.0 / j):
                found = (kk, cand, bound)
                break
        if found is None:
            raise ScheduleTooSlow(f"no feasible n for stage {j} under the enumeration cap")
        k, cand, prev_bound = found
        params.append(cand)
    return params


def _stage_rprime(r, gap1: float, j: int):
    if isinstance(r, Fraction):
        return r + Fraction(gap1).limit_denominator(4096) / j
    return float(r) + gap1 / j


def _stage_bound(p: StageParams) -> float:
    a1, a2, b = first_stage(p)
    return first_stage_cover_measure(p, sumset_cover_count(a1, a2, b, p))


# ---------------------------------------------------------------------------
# projective transformation
# ---------------------------------------------------------------------------

def projective_pullback(u: float, v: float) -> tuple[float, float]:
    """(u, v) -> (u/v, 1/v). The map (x, y) -> (x, 1)/y is an involution, so
    this is simultaneously the forward map and its inverse."""
    if v == 0:
        raise ValueError("singularity: second coordinate must be nonzero")
    return (u / v, 1.0 / v)


def pullback_points(us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Vectorized pullback of a sampled product set; requires vs >= 1/10
    (the clamp applied to the second factor guarantees it)."""
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if np.any(vs < 0.1):
        raise ValueError("set pullback requires second coordinates >= 1/10")
    return np.stack([us / vs, 1.0 / vs], axis=1)


def map_line(b: float, e) -> tuple[float, float]:
    """Line through (b, 0) with unit direction e = (e1, e2), e2 != 0, is
    carried to the line with parameters (b, e1/e2)."""
    e1, e2 = float(e[0]), float(e[1])
    if e2 == 0:
        raise ValueError("excluded direction: e2 must be nonzero")
    return (float(b), e1 / e2)


# ---------------------------------------------------------------------------
# disjointness experiment
# ---------------------------------------------------------------------------

@dataclass
class DisjointnessResult:
    fraction_disjoint: float
    fraction_disjoint_mirrored: float
    angles: np.ndarray
    disjoint: np.ndarray
    exceptional_dist: np.ndarray
    exceptional_angles: np.ndarray
    concentration: float
    concentration_radius: float
    sumset_lo: np.ndarray
    sumset_hi: np.ndarray
    a_cell_count: int
    b_cell_count: int
    stages_materialized: int


def _slope_padding(c_mid: np.ndarray, level: int, pad_cells: int) -> np.ndarray:
    """Slope-space fattening of the sumset cover matched to the experiment
    resolution: a cell collision at scale 2**-level moves the collision
    direction's slope by up to ~sqrt(1 + c^2) * v * gap."""
    gap = (2.0 * (pad_cells + 1) + 2.0) * 2.0**-level
    return np.sqrt(1.0 + c_mid**2) * 1.1 * gap


def disjointness_experiment(
    state: ConstructionState,
    line_samples: int,
    level: int,
    seed: int,
    pad_cells: int = 1,
    max_pullback_points: int = 1_000_000,
) -> DisjointnessResult:
    """Test P_L(A) disjoint from P_L(-B x {0}) over sampled lines L.

    A is the pullback of the product A1 x A2 (one sample point per interval
    pair, covers padded by one cell so every sampled point stays covered);
    B sits on the x-axis with the sign flip the line-counting argument
    dictates. Failing directions are localized against the sumset cover:
    a line L fails only if the slope of its normal lies in the resolution-
    fattened cover, so failures concentrate there.
    """
    if state.stage < 1:
        raise ValueError("state must contain at least one stage")
    if line_samples < 1:
        raise ValueError("line_samples must be >= 1")
    a1_lo, a1_hi, stages_a1 = state.a1_intervals(truncate=True)
    a2_lo, a2_hi, stages_a2 = state.a2_intervals(truncate=True)
    u = 0.5 * (a1_lo + a1_hi)
    v = 0.5 * (a2_lo + a2_hi)
    n_pairs = u.size * v.size
    stride = max(1, math.ceil(n_pairs / max_pullback_points))
    uu = np.repeat(u, v.size)[::stride]
    vv = np.tile(v, u.size)[::stride]
    a_pts = pullback_points(uu, vv)
    a_cover = DyadicCover.from_points(a_pts, level, pad=pad_cells)

    b_lo, b_hi = state.b_intervals()
    b_centers = 0.5 * (b_lo + b_hi)
    b_neg = np.stack([-b_centers, np.zeros_like(b_centers)], axis=1)
    b_pos = np.stack([b_centers, np.zeros_like(b_centers)], axis=1)
    b_cover = DyadicCover.from_points(b_neg, level, pad=pad_cells)
    b_cover_mirror = DyadicCover.from_points(b_pos, level, pad=pad_cells)

    rng = substream(seed, "disjointness-lines")
    angles = rng.uniform(0.0, math.pi, size=line_samples)
    disjoint = np.zeros(line_samples, dtype=bool)
    disjoint_mirror = np.zeros(line_samples, dtype=bool)
    for i, theta in enumerate(angles):
        line = Subspace.from_angle(theta)
        pa = project_cover(a_cover, line, level)
        pb = project_cover(b_cover, line, level)
        disjoint[i] = intersect_covers(pa, pb).is_empty
        pbm = project_cover(b_cover_mirror, line, level)
        disjoint_mirror[i] = intersect_covers(pa, pbm).is_empty

    c_lo, c_hi = state.sumset_cover()
    mids = 0.5 * (c_lo + c_hi)
    pad = _slope_padding(mids, level, pad_cells)
    padded_lo, padded_hi = intervals.merge(c_lo - pad, c_hi + pad)

    fails = ~disjoint
    fail_angles = angles[fails]
    # the failing line's normal is e = (-sin, cos): slope e1/e2 = -tan(theta)
    slopes = -np.tan(fail_angles)
    dists = intervals.distance(padded_lo, padded_hi, slopes)
    radius = 2.0 * 2.0**-level
    concentration = float(np.mean(dists <= radius)) if dists.size else 1.0
    return DisjointnessResult(
        fraction_disjoint=float(np.mean(disjoint)),
        fraction_disjoint_mirrored=float(np.mean(disjoint_mirror)),
        angles=angles,
        disjoint=disjoint,
        exceptional_dist=dists,
        exceptional_angles=fail_angles,
        concentration=concentration,
        concentration_radius=radius,
        sumset_lo=padded_lo,
        sumset_hi=padded_hi,
        a_cell_count=a_cover.count,
        b_cell_count=b_cover.count,
        stages_materialized=min(stages_a1, stages_a2),
    )


# ---------------------------------------------------------------------------
# dimension readouts
# ---------------------------------------------------------------------------

def stage_dimension_readouts(state: ConstructionState) -> list[dict]:
    """Per-stage dimension trends of the generating patterns.

    Each stage's first-stage sets are K intervals of width 2 * n**-r_prime,
    so their box-count slope over dyadic levels from the whole set down to
    the interval width tracks log K / log n**r_prime: r/r', (1-r)/r' and
    (2r-1)/r' for A1, A2, B. As r' decreases to r these climb toward 1,
    s - 1 and 2 - s.
    """
    from .scaling import _fit  # local import to avoid a cycle at module load

    out = []
    for rep in state.reports:
        p = rep.params
        w = p.width
        top = max(4, math.ceil(-math.log2(w)))
        levels = list(range(0, top + 1))
        row = {"n": p.n, "r_prime": float(p.r_prime)}
        for name, (count, denom) in {
            "a1": (p.k1, p.a1_denominator),
            "a2": (p.k2, p.a2_denominator),
            "b": (p.kb, p.b_denominator),
        }.items():
            nums = np.arange(1, count + 1)
            counts = intervals.box_counts(nums / denom - w, nums / denom + w, levels)
            fit = _fit(levels, counts, 2)
            rexp = float(p.r) if name == "a1" else (1 - float(p.r) if name == "a2" else 2 * float(p.r) - 1)
            row[f"{name}_slope"] = fit.slope
            row[f"{name}_heuristic"] = rexp / float(p.r_prime)
        out.append(row)
    return out
