"""The arithmetic construction, its exact certificates, the projective map
and the disjointness experiment.

Core claims:
    - first-stage counts and the product/sum certificates reproduce the
      worked integer examples exactly (no floating point involved)
    - the range-sweep sum count matches a brute-force set enumeration
    - tampered inputs are caught (ok=false), too-slow schedules error out
    - the cover bound decreases strictly along accepted schedules and the
      per-stage dimension readouts trend monotonically
    - the projective involution round-trips points and carries lines to
      lines as stated
    - disjointness is preserved under refinement and failures localize in
      the fattened sumset cover
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from fractal_proj_lab import intervals
from fractal_proj_lab.counterexample import (
    ArithmeticSet,
    CertificateError,
    ConstructionState,
    ScheduleTooSlow,
    StageParams,
    TooManyIntervals,
    default_schedule,
    disjointness_experiment,
    first_stage,
    first_stage_cover_intervals,
    first_stage_cover_measure,
    floor_power,
    iterate_construction,
    map_line,
    projective_pullback,
    pullback_points,
    stage_dimension_readouts,
    sum_product_inclusion,
    sumset_cover_count,
)
from fractal_proj_lab.grassmannian import Subspace, project_cover
from fractal_proj_lab.measures import DyadicCover
from fractal_proj_lab.scaling import box_dimension, intersect_covers

S43 = Fraction(4, 3)
S32 = Fraction(3, 2)


# -- exact powers --------------------------------------------------------------

def test_floor_power_exact_rationals():
    # 64**(2/3) is 15.999999... in floats; the exact path must give 16
    assert floor_power(64, Fraction(2, 3)) == 16
    assert floor_power(16, Fraction(3, 4)) == 8
    assert floor_power(10**6, Fraction(1, 2)) == 1000
    assert floor_power(7, Fraction(1, 2)) == 2


def test_stage_params_worked_examples():
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    assert (p.k1, p.k2, p.kb) == (8, 2, 4)
    q = StageParams(n=64, s=S32, r_prime=Fraction(3, 4))
    assert (q.k1, q.k2, q.kb) == (16, 4, 4)


def test_stage_params_validation():
    with pytest.raises(ValueError):
        StageParams(n=16, s=Fraction(5, 2), r_prime=1.0)  # s outside (1,2)
    with pytest.raises(ValueError):
        StageParams(n=16, s=S43, r_prime=0.5)  # r_prime <= r
    with pytest.raises(ValueError):
        StageParams(n=1, s=S43, r_prime=1.0)


def test_boundary_regime_small_kb():
    p = StageParams(n=10_000, s=Fraction(1999, 1000), r_prime=0.52)
    assert p.kb == 1  # B nearly trivial but valid
    a1, a2, b = first_stage(p)
    assert sum_product_inclusion(a2, b, p).ok


# -- first stage and certificates ------------------------------------------------

def test_first_stage_n16():
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    a1, a2, b = first_stage(p)
    assert a1.numerators.tolist() == list(range(1, 9))
    assert a2.numerators.tolist() == [1, 2]
    assert b.numerators.tolist() == [1, 2, 3, 4]
    assert a1.denominator == pytest.approx(8.0)
    assert a2.denominator == pytest.approx(2.0)
    assert b.denominator == pytest.approx(4.0)


def test_inclusion_products_n16():
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    _, a2, b = first_stage(p)
    inc = sum_product_inclusion(a2, b, p)
    assert inc.products.tolist() == [1, 2, 3, 4, 6, 8]
    assert inc.ok and inc.max_product == 8


def test_inclusion_max_product_n64():
    p = StageParams(n=64, s=S32, r_prime=Fraction(3, 4))
    _, a2, b = first_stage(p)
    inc = sum_product_inclusion(a2, b, p)
    assert inc.ok and inc.max_product == 16 == p.k1


def test_adversarial_injection_detected():
    # a KB+1 element cannot be constructed legitimately; tampering with the
    # numerators after construction must flip the certificate to ok=false
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    _, a2, b = first_stage(p)
    with pytest.raises(ValueError):
        ArithmeticSet(np.array([1, 2, 3, 4, 5]), p._two_r_minus_one, p.n)
    b.numerators = np.append(b.numerators, p.kb + 1)
    inc = sum_product_inclusion(a2, b, p)
    assert not inc.ok and inc.max_product == 10


def test_adversarial_a2_extension_fails_inclusion():
    # widen A2 beyond its regime: products escape {1..K1}
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    _, _, b = first_stage(p)
    fat_a2 = ArithmeticSet(np.array([1, 2, 3]), Fraction(1, 2), 16)  # 3/|sqrt scale|
    inc = sum_product_inclusion(fat_a2, b, p)
    assert not inc.ok  # 3 * 4 = 12 > 8


def test_sumset_count_n16():
    p = StageParams(n=16, s=S43, r_prime=Fraction(4, 5))
    a1, a2, b = first_stage(p)
    cert = sumset_cover_count(a1, a2, b, p)
    assert cert.count == 15
    assert cert.bound == 15
    # brute-force oracle
    brute = {a + j * k for a in range(1, 9) for j in (1, 2) for k in (1, 2, 3, 4)}
    assert cert.count == len(brute)
    assert brute == set(range(2, 17))


def test_sumset_count_n64():
    p = StageParams(n=64, s=S32, r_prime=Fraction(3, 4))
    a1, a2, b = first_stage(p)
    cert = sumset_cover_count(a1, a2, b, p)
    brute = {a + j * k for a in range(1, 17) for j in range(1, 5) for k in range(1, 5)}
    assert cert.count == len(brute) == 31
    assert cert.count <= 2 * p.k1


def test_sumset_degenerate_single_product():
    # A2'B' = {1} (tiny n forces K2 = KB = 1) shifts A1' without
    # spreading: exactly K1 distinct sums
    p = StageParams(n=3, s=S43, r_prime=1.0)
    a1, a2, b = first_stage(p)
    assert a2.numerators.tolist() == [1] and b.numerators.tolist() == [1]
    cert = sumset_cover_count(a1, a2, b, p)
    assert cert.count == p.k1 == 2


def test_sumset_range_sweep_matches_brute_force_random():
    rng = np.random.default_rng(12)
    p = StageParams(n=4096, s=S43, r_prime=Fraction(11, 8))
    a1, a2, b = first_stage(p)
    cert = sumset_cover_count(a1, a2, b, p)
    prods = {int(j) * int(k) for j in a2.numerators for k in b.numerators}
    brute = {int(a) + q for a in a1.numerators for q in prods}
    assert cert.count == len(brute)


def test_cover_measure_contains_samples():
    # conservative slop: random triples from the thickened sets land
    # inside the certified cover
    p = StageParams(n=256, s=S43, r_prime=2.0)
    a1, a2, b = first_stage(p)
    cert = sumset_cover_count(a1, a2, b, p)
    lo, hi = first_stage_cover_intervals(p, cert)
    rng = np.random.default_rng(3)
    w = p.width
    for _ in range(500):
        x = rng.choice(a1.numerators) / a1.denominator + rng.uniform(-w, w)
        y = rng.choice(b.numerators) / b.denominator + rng.uniform(-w, w)
        z = rng.choice(a2.numerators) / a2.denominator + rng.uniform(-w, w)
        assert intervals.contains(lo, hi, np.array([x + y * z]))[0]
    assert first_stage_cover_measure(p, cert) == pytest.approx(float(np.sum(hi - lo)), rel=1e-9)


# -- schedules -------------------------------------------------------------------

def test_default_schedule_stage2():
    sched = default_schedule(16, S43, 2.0, 2)
    assert [p.n for p in sched] == [16, 4096]
    state = iterate_construction(sched, enforce_targets=True)
    assert state.cover_bounds[0] <= 1.0
    assert state.cover_bounds[1] <= 0.5
    assert state.cover_bounds[1] < state.cover_bounds[0]


def test_three_stage_counts_multiply():
    sched = default_schedule(16, S43, 2.0, 3)
    state = iterate_construction(sched, enforce_targets=True)
    assert state.a1_count == sched[0].k1 * sched[1].k1 * sched[2].k1
    assert state.a2_count == sched[0].k2 * sched[1].k2 * sched[2].k2
    bounds = state.cover_bounds
    assert bounds[0] > bounds[1] > bounds[2]
    assert bounds[2] <= 1 / 3


def test_example_schedule_counts():
    # the mild two-stage schedule: counts multiply even though its bounds
    # are far from the 1/j targets
    sched = [StageParams(16, S43, Fraction(4, 5)), StageParams(4096, S43, Fraction(39, 50))]
    state = iterate_construction(sched, enforce_targets=False)
    assert state.a1_count == 8 * 512 == 4096
    lo, hi = state.a1_intervals()
    assert lo.size == 4096


def test_single_stage_intervals_are_first_stage():
    p = StageParams(16, S43, Fraction(4, 5))
    state = iterate_construction([p])
    lo, hi = state.a1_intervals()
    a1, _, _ = first_stage(p)
    assert np.allclose(0.5 * (lo + hi), a1.values())
    assert np.allclose(hi - lo, 2 * p.width)


def test_empty_schedule_rejected():
    with pytest.raises(ValueError):
        iterate_construction([])


def test_too_slow_schedule_rejected():
    # n frozen while r_prime drops: the sum count stays put but every
    # interval fattens, so the certified bound grows and the stage is
    # rejected
    sched = [StageParams(4096, S43, 1.5), StageParams(4096, S43, 1.2)]
    with pytest.raises(ScheduleTooSlow):
        iterate_construction(sched)


def test_missed_target_rejected_when_enforced():
    sched = [StageParams(16, S43, 2.0), StageParams(256, S43, 1.9)]
    # bound shrinks but misses the 1/2 target at stage 2
    state = iterate_construction(sched, enforce_targets=False)
    if state.cover_bounds[1] > 0.5:
        with pytest.raises(ScheduleTooSlow):
            iterate_construction(sched, enforce_targets=True)


def test_rprime_must_decrease():
    with pytest.raises(ValueError):
        iterate_construction([StageParams(16, S43, 1.5), StageParams(4096, S43, 1.6)])


def test_interval_cap_enforced():
    sched = default_schedule(16, S43, 2.0, 3)
    state = iterate_construction(sched)
    with pytest.raises(TooManyIntervals):
        state.a1_intervals(cap=10_000)


def test_a2_clamp():
    sched = default_schedule(16, S43, 2.0, 2)
    state = iterate_construction(sched)
    lo, hi = state.a2_intervals()
    assert np.all(lo >= 0.1)


def test_b_running_intersection_nonempty_and_nested():
    sched = default_schedule(16, S43, 2.0, 2)
    state = iterate_construction(sched)
    b_lo, b_hi = state.b_intervals()
    assert b_lo.size >= 1
    # every stage-2 B interval sits inside a stage-1 interval
    p1 = sched[0]
    s1_lo = np.arange(1, p1.kb + 1) / p1.b_denominator - p1.width
    s1_hi = np.arange(1, p1.kb + 1) / p1.b_denominator + p1.width
    for lo, hi in zip(b_lo, b_hi):
        assert np.any((s1_lo <= lo + 1e-15) & (hi <= s1_hi + 1e-15))


def test_dimension_readouts_trend_monotone():
    state = iterate_construction(default_schedule(16, S43, 2.0, 3))
    rows = stage_dimension_readouts(state)
    for key in ("a1_slope", "a2_slope", "b_slope"):
        vals = [r[key] for r in rows]
        assert vals[0] < vals[1] < vals[2]
    # targets: 1, s-1 = 1/3, and 2-s = 2/3; trends point toward them
    assert rows[-1]["a1_slope"] < 1.0
    assert rows[-1]["b_slope"] < 2 - float(S43)


# -- projective map -------------------------------------------------------------

def test_projective_map_worked_example():
    assert projective_pullback(1.0, 2.0) == pytest.approx((0.5, 0.5))
    assert projective_pullback(0.5, 0.5) == pytest.approx((1.0, 2.0))


def test_projective_map_involution():
    rng = np.random.default_rng(1)
    for _ in range(50):
        u, v = rng.uniform(-3, 3), rng.uniform(0.1, 5)
        x, y = projective_pullback(u, v)
        assert projective_pullback(x, y) == pytest.approx((u, v), rel=1e-12)


def test_projective_singularity():
    with pytest.raises(ValueError):
        projective_pullback(1.0, 0.0)


def test_pullback_points_clamp_precondition():
    with pytest.raises(ValueError):
        pullback_points(np.array([1.0]), np.array([0.05]))


def test_diagonal_line_maps_to_vertical():
    # points (t, t) sit on the line through 0 with direction (1,1)/sqrt(2);
    # their images (1, 1/t) fill the vertical line x = 1
    for t in (0.5, 1.0, 2.0, -3.0):
        x, y = projective_pullback(t, t)
        assert x == pytest.approx(1.0)
        assert y == pytest.approx(1.0 / t)
    b, slope = map_line(0.0, (1 / math.sqrt(2), 1 / math.sqrt(2)))
    assert (b, slope) == pytest.approx((0.0, 1.0))


def test_map_line_excluded_direction():
    with pytest.raises(ValueError):
        map_line(0.3, (1.0, 0.0))


# -- disjointness experiment ---------------------------------------------------

@pytest.fixture(scope="module")
def stage2_state():
    return iterate_construction(default_schedule(16, S43, 2.0, 2), enforce_targets=True)


def test_disjointness_fractions(stage2_state):
    res = disjointness_experiment(stage2_state, 200, 10, seed=20260810)
    assert res.fraction_disjoint >= 0.9
    assert res.concentration >= 0.95
    assert 0 <= res.fraction_disjoint_mirrored <= 1


def test_disjointness_deterministic(stage2_state):
    a = disjointness_experiment(stage2_state, 60, 9, seed=5)
    b = disjointness_experiment(stage2_state, 60, 9, seed=5)
    assert np.array_equal(a.disjoint, b.disjoint)
    assert np.array_equal(a.exceptional_dist, b.exceptional_dist)


def test_failures_localize_in_sumset_cover(stage2_state):
    res = disjointness_experiment(stage2_state, 300, 10, seed=7)
    if res.exceptional_dist.size:
        frac_near = np.mean(res.exceptional_dist <= res.concentration_radius)
        assert frac_near >= 0.95


def test_certificates_rerun_at_every_stage_grid():
    # the integer facts are stage-independent: they hold on each stage's
    # own grid along the accepted schedule
    for p in default_schedule(16, S43, 2.0, 3):
        a1, a2, b = first_stage(p)
        inc = sum_product_inclusion(a2, b, p)
        assert inc.ok
        cert = sumset_cover_count(a1, a2, b, p)
        assert cert.count <= 2 * p.k1 - 1


def test_pullback_preserves_dimension_proxy(stage2_state):
    # the projective map is bi-Lipschitz on the clamped domain, so the
    # box-count slope of the pulled-back product matches the product's
    a1_lo, a1_hi = stage2_state.a1_intervals()
    a2_lo, a2_hi = stage2_state.a2_intervals()
    u = 0.5 * (a1_lo + a1_hi)
    v = 0.5 * (a2_lo + a2_hi)
    uu = np.repeat(u, v.size)
    vv = np.tile(v, u.size)
    product_pts = np.stack([uu, vv], axis=1)
    pulled = pullback_points(uu, vv)
    # a range spanning the construction's coarse and fine regimes equally
    f_prod = box_dimension(product_pts, 2, 12)
    f_pull = box_dimension(pulled, 2, 12)
    assert abs(f_pull.slope - f_prod.slope) <= 0.1


def test_refinement_preserves_disjointness():
    # covers of the same point sets: disjoint at level k stays disjoint at k+1
    rng = np.random.default_rng(3)
    a = rng.random((200, 2))
    b = rng.random((200, 2)) + np.array([1.5, 0.0])
    theta = 1.1
    line = Subspace.from_angle(theta)
    for level in (6, 7, 8):
        pa = project_cover(DyadicCover.from_points(a, level), line, level)
        pb = project_cover(DyadicCover.from_points(b, level), line, level)
        if intersect_covers(pa, pb).is_empty:
            pa2 = project_cover(DyadicCover.from_points(a, level + 1), line, level + 1)
            pb2 = project_cover(DyadicCover.from_points(b, level + 1), line, level + 1)
            assert intersect_covers(pa2, pb2).is_empty
