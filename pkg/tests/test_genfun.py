"""Cone sums and integrals.

Closed-form goldens are derived from the geometric series and the classical
integral of e^{<xi,x>} over a simplicial cone; the two summation strategies
act as oracles for each other, and small counts are cross-checked against
plain enumeration.
"""

import pytest
from hypothesis import given, settings, strategies as st

from emlattice.exactlin import QMatrix, QVector, qceil, qfloor, rat
from emlattice.germ import (
    MeroGerm,
    NotDivisible,
    TruncSeries,
    germ_add,
    germ_eq,
    germ_sub,
    residue_along,
    series_exp_linear,
    series_f,
    to_analytic,
)
from emlattice.genfun import (
    brion_sum_S,
    count_lattice_points,
    i_cone,
    s_cone,
)
from emlattice.polycone import (
    AffineCone,
    build_polytope,
    cone_transverse_cone,
    tangent_cone,
)

from test_polycone import qv, space, triangle_357, unit_square


def cone2(vertex, rays):
    return AffineCone(space(2), qv(*vertex), [qv(*r) for r in rays])


def exp_series(vec, order):
    return series_exp_linear(QVector([rat(c) for c in vec]), order, len(vec))


def f_of(coords, order):
    return series_f(order).substitute_linear(QMatrix([[rat(c) for c in coords]]))


# ---------------------------------------------------------------------------
# integrals


def test_i_halfline_at_zero():
    a = AffineCone(space(1), qv(0), [qv(1)])
    expected = MeroGerm(TruncSeries.const(-1, 1, 7), [(1,)])
    assert germ_eq(i_cone(a, 5), expected)


def test_i_halfline_shifted():
    a = AffineCone(space(1), qv(rat(1, 2)), [qv(1)])
    expected = MeroGerm(exp_series([rat(1, 2)], 7).scale(-1), [(1,)])
    assert germ_eq(i_cone(a, 5), expected)


def test_i_first_quadrant():
    a = cone2((0, 0), [(1, 0), (0, 1)])
    expected = MeroGerm(TruncSeries.const(1, 2, 8), [(1, 0), (0, 1)])
    assert germ_eq(i_cone(a, 5), expected)


def test_i_skew_cone_carries_volume():
    a = cone2((0, 0), [(1, 0), (1, 2)])
    expected = MeroGerm(TruncSeries.const(2, 2, 8), [(1, 0), (1, 2)])
    assert germ_eq(i_cone(a, 5), expected)


def test_i_point_cone_evaluates():
    a = cone2((rat(1, 3), rat(2, 7)), [])
    assert germ_eq(i_cone(a, 5), MeroGerm(exp_series([rat(1, 3), rat(2, 7)], 5)))


def test_i_cone_with_line_vanishes():
    a = cone2((0, 0), [(1, 0), (-1, 0), (0, 1)])
    g = i_cone(a, 4)
    assert g.num.is_zero()


def test_i_translation_law():
    a = cone2((0, 0), [(1, 0), (1, 2)])
    t = qv(rat(2, 3), -1)
    lhs = i_cone(AffineCone(a.space, t, a.rays), 4)
    base = i_cone(a, 4)
    rhs = MeroGerm(base.num * exp_series([rat(2, 3), -1], base.num.order), base.den)
    assert germ_eq(lhs, rhs)


def test_i_valuation_under_subdivision():
    whole = cone2((0, 0), [(1, 0), (0, 1)])
    left = cone2((0, 0), [(1, 0), (1, 1)])
    right = cone2((0, 0), [(1, 1), (0, 1)])
    assert germ_eq(i_cone(whole, 4), germ_add(i_cone(left, 4), i_cone(right, 4)))


# ---------------------------------------------------------------------------
# lattice sums in one dimension


def test_s_halfline_at_zero():
    a = AffineCone(space(1), qv(0), [qv(1)])
    expected = MeroGerm(series_f(7), [(1,)])
    assert germ_eq(s_cone(a, 5), expected)


def test_s_halfline_fractional_vertex():
    # points ceil(1/2), ceil(1/2)+1, ... = 1, 2, ...
    a = AffineCone(space(1), qv(rat(1, 2)), [qv(1)])
    expected = MeroGerm(exp_series([1], 7) * series_f(7), [(1,)])
    assert germ_eq(s_cone(a, 5), expected)


def test_s_negative_halfline():
    a = AffineCone(space(1), qv(0), [qv(-1)])
    expected = MeroGerm(f_of([-1], 7), [(-1,)])
    assert germ_eq(s_cone(a, 5), expected)


def test_s_two_halflines_sum_to_point_sum():
    # [PAPER identity] S(s + R+) + S(s - R+) = S({s}) for every rational s
    sp = space(1)
    for s, pts in ((rat(0), 1), (rat(3, 7), 0), (rat(2), 1)):
        up = s_cone(AffineCone(sp, QVector([s]), [qv(1)]), 5)
        down = s_cone(AffineCone(sp, QVector([s]), [qv(-1)]), 5)
        total = germ_add(up, down)
        if pts:
            expected = MeroGerm(exp_series([s], 7), ())
        else:
            expected = MeroGerm(TruncSeries.zero(1, 7), ())
        assert germ_eq(total, expected, order=5)


def test_s_halfline_strategies_agree():
    a = AffineCone(space(1), qv(rat(-5, 3)), [qv(1)])
    assert germ_eq(s_cone(a, 6, "direct"), s_cone(a, 6, "barvinok"))


# ---------------------------------------------------------------------------
# lattice sums in higher dimension


def test_s_first_quadrant_golden():
    a = cone2((0, 0), [(1, 0), (0, 1)])
    expected = MeroGerm(f_of([1, 0], 8) * f_of([0, 1], 8), [(1, 0), (0, 1)])
    assert germ_eq(s_cone(a, 5), expected)


def test_s_point_cone():
    assert germ_eq(s_cone(cone2((2, 3), []), 4), MeroGerm(exp_series([2, 3], 4)))
    assert s_cone(cone2((rat(1, 2), 0), []), 4).num.is_zero()


def test_s_diagonal_ray():
    a = cone2((0, 0), [(1, 1)])
    expected = MeroGerm(f_of([1, 1], 6), [(1, 1)])
    assert germ_eq(s_cone(a, 4), expected)
    b = cone2((rat(1, 2), rat(1, 2)), [(1, 1)])
    expected_b = MeroGerm(exp_series([1, 1], 6) * f_of([1, 1], 6), [(1, 1)])
    assert germ_eq(s_cone(b, 4), expected_b)


def test_s_offspan_affine_line_is_zero():
    a = cone2((rat(1, 2), 0), [(0, 1)])
    assert s_cone(a, 4).num.is_zero()


def test_s_cone_with_line_is_zero():
    a = cone2((0, 0), [(1, 0), (-1, 0), (0, 1)])
    assert s_cone(a, 4).num.is_zero()


def test_s_translation_by_lattice_vector():
    a = cone2((rat(1, 7), rat(3, 5)), [(1, 0), (1, 2)])
    t = qv(2, -1)
    lhs = s_cone(a.translate(t), 4)
    base = s_cone(a, 4)
    rhs = MeroGerm(base.num * exp_series([2, -1], base.num.order), base.den)
    assert germ_eq(lhs, rhs)


def test_s_valuation_under_subdivision():
    whole = s_cone(cone2((0, 0), [(1, 0), (0, 1)]), 4)
    left = s_cone(cone2((0, 0), [(1, 0), (1, 1)]), 4)
    right = s_cone(cone2((0, 0), [(1, 1), (0, 1)]), 4)
    shared = s_cone(cone2((0, 0), [(1, 1)]), 4)
    assert germ_eq(whole, germ_sub(germ_add(left, right), shared))


def test_s_residue_is_minus_projected_sum():
    a = cone2((0, 0), [(1, 0), (0, 1)])
    g = s_cone(a, 5)
    i = list(a.rays).index(qv(1, 0))
    res = residue_along(g, qv(1, 0))
    proj = s_cone(cone_transverse_cone(a, [i]), 4)
    assert germ_eq(res, proj.scale(-1), order=3)


def test_s_strategies_agree_on_skew_cone():
    a = cone2((rat(1, 7), rat(9, 11)), [(1, 0), (1, 2)])
    assert germ_eq(s_cone(a, 4, "direct"), s_cone(a, 4, "barvinok"))


def test_s_strategies_agree_on_wide_cone():
    a = cone2((rat(-1, 2), rat(1, 3)), [(2, 1), (1, 3)])
    assert germ_eq(s_cone(a, 4, "direct"), s_cone(a, 4, "barvinok"))


def test_s_strategies_agree_in_3d():
    a = AffineCone(
        space(3), qv(rat(1, 2), 0, rat(1, 3)), [qv(1, 0, 0), qv(0, 1, 0), qv(1, 1, 2)]
    )
    assert germ_eq(s_cone(a, 3, "direct"), s_cone(a, 3, "barvinok"))


def test_s_non_simplicial_matches_inclusion_exclusion():
    rays = [qv(1, 0, 1), qv(0, 1, 1), qv(-1, 0, 1), qv(0, -1, 1)]
    a = AffineCone(space(3), qv(0, 0, 0), rays)
    whole = s_cone(a, 3)
    p1 = AffineCone(space(3), qv(0, 0, 0), [qv(1, 0, 1), qv(0, 1, 1), qv(0, -1, 1)])
    p2 = AffineCone(space(3), qv(0, 0, 0), [qv(0, 1, 1), qv(-1, 0, 1), qv(0, -1, 1)])
    shared = AffineCone(space(3), qv(0, 0, 0), [qv(0, 1, 1), qv(0, -1, 1)])
    combo = germ_sub(germ_add(s_cone(p1, 3), s_cone(p2, 3)), s_cone(shared, 3))
    assert germ_eq(whole, combo)


def test_s_non_simplicial_strategies_agree():
    rays = [qv(1, 0, 1), qv(0, 1, 1), qv(-1, 0, 1), qv(0, -1, 1)]
    a = AffineCone(space(3), qv(rat(1, 3), rat(-1, 2), 0), rays)
    assert germ_eq(s_cone(a, 3, "direct"), s_cone(a, 3, "barvinok"))


def test_s_barvinok_forced_on_big_index():
    a = cone2((0, 0), [(1, 0), (211, 532)])
    direct = s_cone(a, 2, "direct")
    auto = s_cone(a, 2)  # index 532 exceeds the direct threshold
    assert germ_eq(direct, auto)


small_rat = st.tuples(st.integers(-6, 6), st.integers(1, 4)).map(lambda t: rat(*t))


@settings(max_examples=40, deadline=None)
@given(
    small_rat,
    small_rat,
    st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
    st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
)
def test_s_strategy_agreement_random(sx, sy, r1, r2):
    m = QMatrix.from_cols([qv(*r1), qv(*r2)], nrows=2)
    if m.rank() != 2:
        return
    a = cone2((sx, sy), [r1, r2])
    assert germ_eq(s_cone(a, 2, "direct"), s_cone(a, 2, "barvinok"))


# ---------------------------------------------------------------------------
# Brion sums over polytopes


def _series_of_points(pts, order, dim):
    acc = TruncSeries.zero(dim, order)
    for p in pts:
        acc = acc + exp_series(p, order)
    return acc


def test_brion_unit_segment():
    p = build_polytope(space(1), [qv(0), qv(1)])
    g = brion_sum_S(p, 5)
    assert germ_eq(g, MeroGerm(_series_of_points([[0], [1]], 7, 1)), order=5)


def test_brion_rational_segment():
    p = build_polytope(space(1), [qv(rat(1, 3)), qv(rat(7, 3))])
    g = brion_sum_S(p, 5)
    assert germ_eq(g, MeroGerm(_series_of_points([[1], [2]], 7, 1)), order=5)


def test_brion_segment_in_plane():
    p = build_polytope(space(2), [qv(0, 0), qv(3, 0)])
    g = brion_sum_S(p, 4)
    pts = [[x, 0] for x in range(4)]
    assert germ_eq(g, MeroGerm(_series_of_points(pts, 6, 2)), order=4)


def test_brion_point_polytope():
    p = build_polytope(space(2), [qv(1, -2)])
    assert germ_eq(brion_sum_S(p, 4), MeroGerm(exp_series([1, -2], 4)))
    q = build_polytope(space(2), [qv(rat(1, 2), 0)])
    assert brion_sum_S(q, 4).num.is_zero()


def test_brion_unit_square_series():
    p = unit_square()
    g = brion_sum_S(p, 4)
    pts = [[x, y] for x in (0, 1) for y in (0, 1)]
    assert germ_eq(g, MeroGerm(_series_of_points(pts, 8, 2)), order=4)


def brute_count_2d(p):
    lo = [min(v[i] for v in p.vertices) for i in range(2)]
    hi = [max(v[i] for v in p.vertices) for i in range(2)]
    n = 0
    for x in range(qceil(lo[0]), qfloor(hi[0]) + 1):
        for y in range(qceil(lo[1]), qfloor(hi[1]) + 1):
            if p.contains(qv(x, y)):
                n += 1
    return n


def test_count_goldens():
    assert count_lattice_points(unit_square()) == 4
    tri = build_polytope(space(2), [qv(0, 0), qv(1, 0), qv(0, 1)])
    assert count_lattice_points(tri) == 3
    empty = build_polytope(
        space(2), [qv(rat(1, 4), rat(1, 4)), qv(rat(1, 2), rat(1, 4)), qv(rat(1, 4), rat(1, 2))]
    )
    assert count_lattice_points(empty) == 0


def test_count_dilated_square():
    from emlattice.polycone import dilate_polytope

    for t in (2, 3, 5):
        q = dilate_polytope(unit_square(), t)
        assert count_lattice_points(q) == (t + 1) ** 2


point2 = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


@settings(max_examples=40, deadline=None)
@given(st.lists(point2, min_size=1, max_size=5))
def test_count_matches_enumeration(pts):
    p = build_polytope(space(2), [qv(*t) for t in pts])
    assert count_lattice_points(p) == brute_count_2d(p)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.tuples(st.integers(-9, 9), st.integers(1, 3)),
            st.tuples(st.integers(-9, 9), st.integers(1, 3)),
        ),
        min_size=3,
        max_size=5,
    )
)
def test_count_matches_enumeration_rational(raw):
    pts = [qv(rat(*a), rat(*b)) for a, b in raw]
    p = build_polytope(space(2), pts)
    assert count_lattice_points(p) == brute_count_2d(p)
