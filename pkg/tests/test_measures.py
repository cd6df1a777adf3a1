"""Covers, point measures, generators and the Frostman diagnostics.

Core claims:
    - digit-set generators enumerate exactly the expected cells and counts
    - refine-then-coarsen is the identity on the coarse cover
    - products multiply cell counts; the natural measure has unit mass
    - Frostman ratios match exact ball-count oracles (uniform grid, atom)
    - frostman_check is deterministic and monotone in the exponent
"""

import math

import numpy as np
import pytest

from fractal_proj_lab.measures import (
    DyadicCover,
    PointMeasure,
    cantor_digit_set,
    frostman_check,
    natural_measure,
    product_cover,
    union_covers,
)

LOG23 = math.log(2) / math.log(3)


# -- generators --------------------------------------------------------------

def test_cantor_level1_cells():
    c = cantor_digit_set(3, {0, 2}, 1)
    assert c.cells.ravel().tolist() == [0, 2]
    assert c.cell_width == pytest.approx(1 / 3)


def test_cantor_level2_cells():
    c = cantor_digit_set(3, {0, 2}, 2)
    assert c.cells.ravel().tolist() == [0, 2, 6, 8]


def test_cantor_counts_power():
    assert cantor_digit_set(3, {0, 2}, 10).count == 1024
    assert cantor_digit_set(4, {0, 2, 3}, 5).count == 3**5


def test_cantor_empty_digits_rejected():
    with pytest.raises(ValueError):
        cantor_digit_set(3, set(), 4)


def test_cantor_coarsen_consistency():
    # level k+1 coarsened once reproduces level k exactly
    for k in (0, 1, 4, 7):
        assert cantor_digit_set(3, {0, 2}, k + 1).coarsen(1) == cantor_digit_set(3, {0, 2}, k)


def test_refine_then_coarsen_identity():
    c = cantor_digit_set(3, {0, 2}, 5)
    assert c.refine(2).coarsen(2) == c
    sq = DyadicCover.from_points(np.random.default_rng(1).random((50, 2)), 6)
    assert sq.refine(1).coarsen(1) == sq


def test_product_cover_counts():
    a = cantor_digit_set(3, {0, 2}, 1)
    assert product_cover(a, a).count == 4
    full = DyadicCover(1, 3, np.arange(8)[:, None])
    assert product_cover(full, full).count == 4**3


def test_product_cover_regrids_levels():
    a = cantor_digit_set(3, {0, 2}, 3)
    b = cantor_digit_set(3, {0, 2}, 2)
    prod = product_cover(a, b)
    assert prod.level == 3
    assert prod.count == a.count * b.refine(1).count


def test_product_cover_base_mismatch():
    with pytest.raises(ValueError):
        product_cover(cantor_digit_set(3, {0, 2}, 2), cantor_digit_set(4, {0, 2}, 2))


def test_cell_count_monotone_in_level():
    pts = np.random.default_rng(7).random((300, 2))
    prev = None
    for level in range(2, 9):
        n = DyadicCover.from_points(pts, level).count
        if prev is not None:
            assert prev <= n <= 4 * prev
        prev = n


# -- natural measure ---------------------------------------------------------

def test_natural_measure_mass_and_resolution():
    cover = cantor_digit_set(3, {0, 2}, 7)
    mu = natural_measure(cover)
    assert abs(mu.total_mass - 1.0) <= cover.count * np.finfo(float).eps
    assert mu.resolution == pytest.approx(3.0**-7)
    assert np.all(mu.weights == mu.weights[0])


def test_natural_measure_single_cell():
    mu = natural_measure(DyadicCover(2, 3, [[1, 5]]))
    assert mu.support_size == 1
    assert mu.total_mass == 1.0
    assert mu.points[0].tolist() == [1.5 / 8, 5.5 / 8]


def test_natural_measure_empty_rejected():
    with pytest.raises(ValueError):
        natural_measure(DyadicCover(1, 2, np.empty((0, 1))))


def test_point_measure_validation():
    with pytest.raises(ValueError):
        PointMeasure(2, [[0.0, 0.0]], [-1.0], 0.1)
    with pytest.raises(ValueError):
        PointMeasure(2, [[0.0, 0.0]], [0.0], 0.1)
    with pytest.raises(ValueError):
        PointMeasure(2, [[0.0, 0.0]], [1.0], 0.0)


def test_point_measure_csv_roundtrip():
    mu = natural_measure(cantor_digit_set(3, {0, 2}, 3))
    text = mu.to_csv()
    assert text.splitlines()[0] == "x,w"
    back = PointMeasure.from_csv(text, mu.resolution)
    assert np.allclose(back.points, mu.points)
    assert np.allclose(back.weights, mu.weights)
    mu2 = PointMeasure(2, [[0.25, 0.75]], [1.0], 0.5)
    assert mu2.to_csv().splitlines()[0] == "x,y,w"


def test_cover_text_roundtrip():
    c = cantor_digit_set(3, {0, 2}, 4)
    back = DyadicCover.from_text(c.to_text())
    assert back == c
    assert c.to_text().splitlines()[0] == "level 4"
    sq = DyadicCover.from_points(np.random.default_rng(0).random((20, 2)), 5)
    assert DyadicCover.from_text(sq.to_text()) == sq


# -- frostman ----------------------------------------------------------------

def _uniform_grid(n=256):
    return natural_measure(DyadicCover(1, int(math.log2(n)), np.arange(n)[:, None]))


def test_frostman_uniform_oracle():
    # exact oracle: a closed ball of radius r at a grid center holds
    # (2*floor(r/dx)+1)/n mass, so the ratio at s=1 peaks at 3 as r -> dx
    mu = _uniform_grid()
    rep = frostman_check(mu, 1.0, 400, seed=3)
    assert rep.sup_ratio <= 3.0 + 1e-9
    assert rep.sup_ratio > 1.0


def test_frostman_atom_blowup():
    atom = PointMeasure(1, [[0.25]], [1.0], 0.01)
    rep = frostman_check(atom, 0.5, 200, seed=5)
    # the whole mass sits in every ball: ratio approaches res**-s at r -> res
    assert rep.sup_ratio <= 0.01**-0.5 + 1e-9
    assert rep.sup_ratio > 0.8 * 0.01**-0.5
    assert rep.sup_at_min_radius


def test_frostman_supercritical_blows_up():
    mu = _uniform_grid()
    rep = frostman_check(mu, 2.0, 400, seed=3)
    assert rep.sup_ratio >= 1.0 / mu.resolution


def test_frostman_deterministic():
    mu = _uniform_grid(128)
    a = frostman_check(mu, 0.8, 300, seed=11)
    b = frostman_check(mu, 0.8, 300, seed=11)
    assert a.sup_ratio == b.sup_ratio and a.sup_at_min_radius == b.sup_at_min_radius


def test_frostman_monotone_in_exponent():
    # all sampled radii are <= 1 here, so r**-s grows with s pointwise
    mu = _uniform_grid(128)
    sups = [frostman_check(mu, s, 300, seed=7).sup_ratio for s in (0.5, 1.0, 1.5)]
    assert sups[0] <= sups[1] <= sups[2]


def test_frostman_middle_thirds_stable_across_levels():
    # self-similarity: the critical-exponent ratio stays bounded as the
    # level grows (levels 6 and 10 within a factor of 4)
    s = LOG23
    r6 = frostman_check(natural_measure(cantor_digit_set(3, {0, 2}, 6)), s, 400, seed=13)
    r10 = frostman_check(natural_measure(cantor_digit_set(3, {0, 2}, 10)), s, 400, seed=13)
    assert r10.sup_ratio <= 4 * r6.sup_ratio
    assert r6.sup_ratio <= 4 * r10.sup_ratio


def test_frostman_rejects_bad_exponent():
    with pytest.raises(ValueError):
        frostman_check(_uniform_grid(64), -0.5, 10, seed=0)


# -- misc cover behaviour ------------------------------------------------------

def test_union_count_bounds():
    rng = np.random.default_rng(5)
    p = DyadicCover.from_points(rng.random((80, 2)), 5)
    q = DyadicCover.from_points(rng.random((80, 2)), 5)
    u = union_covers(p, q)
    assert max(p.count, q.count) <= u.count <= p.count + q.count


def test_contains_points():
    c = cantor_digit_set(3, {0, 2}, 2)
    assert c.contains_points(np.array([[0.05], [0.5]])).tolist() == [True, False]
