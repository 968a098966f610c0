"""Tests for truncated series and meromorphic germ arithmetic.

The two analytic identities used as goldens were checked by hand first:
  1/(1-e^x) + 1/(1-e^{-x}) = 1
  1/(1-e^x) + 1/x = 1/2 - x/12 + x^3/720 - ...   (odd terms beyond x vanish
  through order 3; the x^2 coefficient is 0)
Both follow from F(x) = x/(1-e^x) = -sum B_n x^n/n! with B_1 = -1/2.
"""

import pytest
from hypothesis import given, settings, strategies as st

from emlattice.exactlin import QMatrix, QVector, rat
from emlattice.germ import (
    LinearForm,
    MeroGerm,
    NotDivisible,
    OrderUnderflow,
    TruncSeries,
    bernoulli_numbers,
    canonical_form,
    divide_by_linear_form,
    germ_add,
    germ_eq,
    germ_from_series,
    germ_mul,
    germ_scale,
    germ_sub,
    residue_along,
    series_exp_linear,
    series_f,
    substitute_linear,
    to_analytic,
)


def V(c):
    return QVector(c)


def S(dim, coeffs, order):
    return TruncSeries(dim, {tuple(k): rat(v) for k, v in coeffs.items()}, order)


# ------------------------------------------------------------------- series


def test_series_basics():
    a = S(2, {(0, 0): 1, (1, 0): 2}, 3)
    b = S(2, {(1, 0): -2, (0, 1): "1/2"}, 3)
    assert (a + b).coeffs == {(0, 0): rat(1), (0, 1): rat(1, 2)}
    assert (a - a).is_zero()
    assert a.scale(0).is_zero()
    c = a * b
    assert c.order == 3
    assert c.coeff((1, 1)) == 1  # 1 * xi2/2 + 2 xi1 * ... -> (1,1): 2*(1/2)
    assert c.coeff((2, 0)) == -4


def test_series_order_rules():
    a = S(1, {(0,): 1}, 4)
    lin = S(1, {(1,): 1}, None)  # exact polynomial x
    assert (a * lin).order == 5  # multiplying by valuation-1 factor gains one
    assert (lin * lin).order is None
    b = S(1, {(2,): 1}, 6)
    assert (a * b).order == 6  # min(4+2, 6+0)
    zero_trunc = TruncSeries.zero(1, 3)
    # (1 + O(x^5)) * O(x^4) = O(x^4): exact only through 3
    assert (a * zero_trunc).order == 3
    assert (zero_trunc * zero_trunc).order == 7  # O(x^4)*O(x^4)


def test_series_coeff_guard():
    a = S(1, {(0,): 1}, 2)
    with pytest.raises(ValueError):
        a.coeff((3,))


def test_series_exp_linear():
    assert series_exp_linear(V([0, 0]), 3) == TruncSeries.const(1, 2, 3)
    e = series_exp_linear(V([1]), 2)
    assert e.coeffs == {(0,): rat(1), (1,): rat(1), (2,): rat(1, 2)}
    e2 = series_exp_linear(V(["1/2", "1/3"]), 1)
    assert e2.coeffs == {(0, 0): rat(1), (1, 0): rat(1, 2), (0, 1): rat(1, 3)}
    # coefficient of xi1*xi2 in e^{xi1+2 xi2} is 2
    e3 = series_exp_linear(V([1, 2]), 3)
    assert e3.coeff((1, 1)) == 2
    assert e3.coeff((0, 2)) == 2
    assert e3.coeff((3, 0)) == rat(1, 6)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(-4, 4), min_size=2, max_size=2),
    st.lists(st.integers(-4, 4), min_size=2, max_size=2),
)
def test_exp_multiplicative(a, b):
    ea = series_exp_linear(V(a), 5)
    eb = series_exp_linear(V(b), 5)
    eab = series_exp_linear(V(a) + V(b), 5)
    assert (ea * eb).eq_through(eab, 5)


def test_bernoulli_numbers():
    b = bernoulli_numbers(6)
    assert b == [1, rat(-1, 2), rat(1, 6), 0, rat(-1, 30), 0, rat(1, 42)]


def test_series_f_golden():
    f = series_f(6)
    assert f.coeff((0,)) == -1
    assert f.coeff((1,)) == rat(1, 2)
    assert f.coeff((2,)) == rat(-1, 12)
    assert f.coeff((3,)) == 0
    assert f.coeff((4,)) == rat(1, 720)
    assert f.coeff((5,)) == 0
    assert f.coeff((6,)) == rat(-1, 30240)


def test_order_overlap_consistency():
    lo, hi = series_f(5), series_f(9)
    assert hi.truncate(5).eq_through(lo, 5)


def test_pretty():
    s = S(2, {(0, 0): "1/2", (1, 0): "-1/12", (0, 2): 3}, 4)
    assert s.pretty() == "1/2 + -1/12 * x1 + 3 * x2^2"
    assert TruncSeries.zero(1, 2).pretty() == "0"


# ------------------------------------------------------------- substitution


def test_substitute_identity():
    s = S(2, {(1, 1): 5, (2, 0): 1}, 4)
    assert s.substitute_linear(QMatrix.identity(2)).coeffs == s.coeffs


def test_substitute_projection():
    # old var 0 -> xi2 in a 2D space
    s = S(1, {(1,): 1, (2,): 3}, 4)
    t = s.substitute_linear(QMatrix([[0, 1]]))
    assert t.coeffs == {(0, 1): rat(1), (0, 2): rat(3)}


def test_substitute_mix():
    # s(x) = x^2 under x -> y1 + y2 gives y1^2 + 2 y1 y2 + y2^2
    s = S(1, {(2,): 1}, 3)
    t = s.substitute_linear(QMatrix([[1, 1]]))
    assert t.coeffs == {(2, 0): rat(1), (1, 1): rat(2), (0, 2): rat(1)}


@st.composite
def small_series(draw, dim=2, order=5):
    n = draw(st.integers(0, 4))
    coeffs = {}
    for _ in range(n):
        a = tuple(draw(st.integers(0, 2)) for _ in range(dim))
        coeffs[a] = rat(draw(st.integers(-5, 5)))
    return TruncSeries(dim, coeffs, order)


@st.composite
def small_matrix(draw, rows=2, cols=2):
    return QMatrix([[draw(st.integers(-3, 3)) for _ in range(cols)] for _ in range(rows)])


@settings(max_examples=50, deadline=None)
@given(small_series(), small_matrix(), small_matrix())
def test_substitute_composition(s, p, r):
    a = s.substitute_linear(p).substitute_linear(r)
    b = s.substitute_linear(p.matmat(r))
    assert a.eq_through(b, 5)


# ----------------------------------------------------------------- division


def test_divide_axis():
    s = S(2, {(1, 0): 1, (1, 1): 1}, 4)  # xi1 (1 + xi2)
    q = divide_by_linear_form(s, V([1, 0]))
    assert q.coeffs == {(0, 0): rat(1), (0, 1): rat(1)}
    assert q.order == 3


def test_divide_axis_not_divisible():
    s = S(2, {(1, 0): 1, (0, 1): 1}, 4)
    with pytest.raises(NotDivisible) as e:
        divide_by_linear_form(s, V([1, 0]))
    assert e.value.degree == (0, 1)


def test_divide_general_form():
    # (xi1 + 2 xi2)^2 / <xi,(1,2)> = xi1 + 2 xi2
    s = S(2, {(2, 0): 1, (1, 1): 4, (0, 2): 4}, 4)
    q = divide_by_linear_form(s, V([1, 2]))
    assert q.coeffs == {(1, 0): rat(1), (0, 1): rat(2)}
    assert q.order == 3


def test_divide_general_not_divisible():
    s = S(2, {(1, 0): 1}, 3)
    with pytest.raises(NotDivisible):
        divide_by_linear_form(s, V([1, 1]))


@settings(max_examples=50, deadline=None)
@given(small_series(), st.sampled_from([(1, 0), (0, 1), (1, 1), (1, 2), (-1, 3)]))
def test_divide_multiply_roundtrip(s, w):
    lin = TruncSeries.linear(V(w), None)
    prod = s * lin
    q = divide_by_linear_form(prod, V(w))
    assert q.eq_through(s, 5)


# -------------------------------------------------------------------- germs


def one_over_one_minus_exp(sign, order):
    """1/(1 - e^{sign*x}) as a germ: F(sign*x)/(sign*x)."""
    f = series_f(order)
    if sign < 0:
        f = f.substitute_linear(QMatrix([[-1]]))
    return MeroGerm(f, [LinearForm(V([sign]))])


def test_canonical_form():
    assert canonical_form(V([2, 4])) == (2, (1, 2))
    assert canonical_form(V([-2, 4])) == (-2, (1, -2))
    assert canonical_form(V(["1/3", "1/2"])) == (rat(1, 6), (2, 3))
    assert canonical_form(V([0, -5])) == (-5, (0, 1))


def test_germ_canonicalization():
    # 1/(2 xi) stored as (1/2)/xi
    g = MeroGerm(TruncSeries.const(1, 1, 4), [LinearForm(V([2]))])
    assert g.den == ((1,),)
    assert g.num.coeff((0,)) == rat(1, 2)
    assert g.target_order == 3


def test_germ_add_zero_and_cancel():
    one_over_x = MeroGerm(TruncSeries.const(1, 1, 5), [LinearForm(V([1]))])
    zero = germ_from_series(TruncSeries.zero(1, 5))
    s = germ_add(one_over_x, zero)
    assert germ_eq(s, one_over_x)
    t = germ_add(one_over_x, one_over_x.scale(-1))
    assert to_analytic(t).is_zero()


def test_geometric_series_identity():
    # 1/(1-e^x) + 1/(1-e^{-x}) = 1
    g = germ_add(one_over_one_minus_exp(1, 8), one_over_one_minus_exp(-1, 8))
    a = to_analytic(g)
    assert a.eq_through(TruncSeries.const(1, 1, a.order), a.order)
    assert a.order >= 6


def test_half_line_vertex_series():
    # 1/(1-e^x) + 1/x = 1/2 - x/12 + 0 x^2 + x^3/720
    g = germ_add(
        one_over_one_minus_exp(1, 8),
        MeroGerm(TruncSeries.const(1, 1, None), [LinearForm(V([1]))]),
    )
    a = to_analytic(g)
    assert a.coeff((0,)) == rat(1, 2)
    assert a.coeff((1,)) == rat(-1, 12)
    assert a.coeff((2,)) == 0
    assert a.coeff((3,)) == rat(1, 720)


def test_germ_mul_reduce():
    one_over_x = MeroGerm(TruncSeries.const(1, 1, 5), [LinearForm(V([1]))])
    x = germ_from_series(S(1, {(1,): 1}, None))
    p = germ_mul(one_over_x, x)
    assert to_analytic(p).eq_through(TruncSeries.const(1, 1, 4), 4)
    one = germ_from_series(TruncSeries.const(1, 1, None))
    assert germ_eq(germ_mul(one_over_x, one), one_over_x)


def test_germ_product_disjoint_vars():
    # two analytic-valued germs on disjoint variables, each still written
    # with a pole in its denominator; the analytic part of the product must
    # equal the product of the analytic parts
    f = series_f(8)
    parts = []
    for P, axis in ((QMatrix([[1, 0]]), V([1, 0])), (QMatrix([[0, 1]]), V([0, 1]))):
        g = MeroGerm(f.substitute_linear(P), [LinearForm(axis)])
        inv = MeroGerm(TruncSeries.const(1, 2, None), [LinearForm(axis)])
        parts.append(germ_add(g, inv))  # F(y)/y + 1/y, analytic
    prod = germ_mul(parts[0], parts[1])
    a = to_analytic(prod)
    b = to_analytic(parts[0]) * to_analytic(parts[1])
    assert a.eq_through(b, 6)


def test_representation_invariant():
    num = S(2, {(0, 0): 1, (1, 0): 2}, 5)
    g = MeroGerm(num, [LinearForm(V([0, 1]))])
    lifted = MeroGerm(num * TruncSeries.linear(V([1, 1]), None), [LinearForm(V([0, 1])), LinearForm(V([1, 1]))])
    assert germ_eq(g, lifted)


def test_substitute_germ():
    one_over_x = MeroGerm(TruncSeries.const(1, 1, 5), [LinearForm(V([1]))])
    lifted = substitute_linear(one_over_x, QMatrix([[0, 1]]))
    assert lifted.den == ((0, 1),)
    assert lifted.num.coeff((0, 0)) == 1
    with pytest.raises(ValueError):
        substitute_linear(one_over_x, QMatrix([[0, 0]]))


def test_substitute_germ_identity():
    g = MeroGerm(S(2, {(0, 0): 1, (1, 1): 2}, 5), [LinearForm(V([1, 2]))])
    assert germ_eq(substitute_linear(g, QMatrix.identity(2)), g)


# ----------------------------------------------------------------- residues


def test_residue_simple_pole():
    g = MeroGerm(TruncSeries.const(1, 2, 4), [LinearForm(V([1, 0]))])
    r = residue_along(g, V([1, 0]))
    assert r.den == ()
    assert r.num.coeff((0, 0)) == 1


def test_residue_of_analytic_is_zero():
    g = germ_from_series(S(2, {(1, 0): 3}, 4))
    r = residue_along(g, V([1, 0]))
    assert r.num.is_zero() and r.den == ()


def test_residue_drops_to_remaining_pole():
    g = MeroGerm(TruncSeries.const(1, 2, 5), [LinearForm(V([1, 0])), LinearForm(V([0, 1]))])
    r = residue_along(g, V([1, 0]))
    assert r.den == ((0, 1),)
    assert to_analytic(germ_mul(r, germ_from_series(S(2, {(0, 1): 1}, None)))).coeff((0, 0)) == 1


def test_residue_scaling():
    # residue along 2v equals half the residue along the same hyperplane
    g = MeroGerm(TruncSeries.const(1, 2, 5), [LinearForm(V([1, 0]))])
    r1 = residue_along(g, V([1, 0]))
    r2 = residue_along(g, V([2, 0]))
    assert germ_eq(r2, germ_scale(r1, 2))


def test_residue_higher_pole_rejected():
    g = MeroGerm(TruncSeries.const(1, 2, 5), [LinearForm(V([1, 0])), LinearForm(V([1, 0]))])
    with pytest.raises(ValueError):
        residue_along(g, V([1, 0]))


# ---------------------------------------------------------------- ring laws


form_pool = st.sampled_from([(1, 0), (0, 1), (1, 1)])


@st.composite
def small_germs(draw):
    num = draw(small_series(dim=2, order=8))
    nden = draw(st.integers(0, 1))
    dens = [LinearForm(V(draw(form_pool))) for _ in range(nden)]
    return MeroGerm(num, dens)


@settings(max_examples=60, deadline=None)
@given(small_germs(), small_germs())
def test_germ_add_commutative(a, b):
    assert germ_eq(germ_add(a, b), germ_add(b, a), order=3)


@settings(max_examples=60, deadline=None)
@given(small_germs(), small_germs(), small_germs())
def test_germ_add_associative(a, b, c):
    lhs = germ_add(germ_add(a, b), c)
    rhs = germ_add(a, germ_add(b, c))
    assert germ_eq(lhs, rhs, order=3)


@settings(max_examples=60, deadline=None)
@given(small_germs(), small_germs(), small_germs())
def test_germ_mul_distributive(a, b, c):
    lhs = germ_mul(a, germ_add(b, c))
    rhs = germ_add(germ_mul(a, b), germ_mul(a, c))
    assert germ_eq(lhs, rhs, order=3)


@settings(max_examples=60, deadline=None)
@given(small_germs(), small_germs())
def test_germ_mul_commutative(a, b):
    assert germ_eq(germ_mul(a, b), germ_mul(b, a), order=3)


@settings(max_examples=40, deadline=None)
@given(small_series(dim=2, order=6), st.lists(form_pool, min_size=0, max_size=2))
def test_to_analytic_roundtrip(s, dens):
    num = s
    for w in dens:
        num = num * TruncSeries.linear(V(w), None)
    g = MeroGerm(num, [LinearForm(V(w)) for w in dens])
    assert to_analytic(g).eq_through(s, 6)


def test_order_underflow():
    shallow = MeroGerm(TruncSeries.const(1, 1, 0), [LinearForm(V([1]))])
    with pytest.raises((OrderUnderflow, NotDivisible)):
        to_analytic(shallow)
    with pytest.raises(OrderUnderflow):
        germ_eq(shallow, shallow.scale(2), order=5)


def test_germ_sub():
    a = MeroGerm(TruncSeries.const(3, 1, 5), [LinearForm(V([1]))])
    b = MeroGerm(TruncSeries.const(1, 1, 5), [LinearForm(V([1]))])
    d = germ_sub(a, b)
    assert germ_eq(d, germ_scale(b, 2))
