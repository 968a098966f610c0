"""The analytic mu function of rational affine cones.

mu assigns to every rational affine cone an analytic germ at 0, normalized
so that the lattice-sum germ of a cone splits as the sum, over all faces,
of mu of the transverse cone times the integral germ of the face.  That
relation determines mu uniquely: subtracting from S(a) what the proper
faces already account for leaves a function with no poles.

Closed forms exist in dimensions one and two; higher-dimensional cones go
through the defining relation itself, with every transverse cone computed
in the (embedded) quotient space and the result lifted back.  All values
are cached modulo lattice translations, which is exactly the invariance
the theory guarantees.
"""

from __future__ import annotations

import math
import threading

from .exactlin import (
    QMatrix,
    QVector,
    RationalSpace,
    ScalarProduct,
    ceil_frac,
    primitive_vector,
    qfloor,
    qstr,
    quotient_lattice,
    orthogonal_projection,
    rat,
)
from .germ import (
    MeroGerm,
    TruncSeries,
    bernoulli_numbers,
    divide_by_linear_form,
    germ_add,
    germ_from_series,
    germ_mul,
    germ_sub,
    germ_zero,
    series_exp_linear,
    to_analytic,
)
from .polycone import (
    AffineCone,
    _check_dim,
    barvinok_decompose,
    cone_transverse_cone,
    dual_cone,
    extreme_rays,
    faces_of_cone,
    span_lattice_basis,
    subcone,
)
from .genfun import _span_lattice_point, i_cone, s_cone

ZERO = rat(0)
ONE = rat(1)

_CACHE = {}
_CACHE_LOCK = threading.Lock()


def mu_cache_clear():
    with _CACHE_LOCK:
        _CACHE.clear()


def mu_cache_size():
    with _CACHE_LOCK:
        return len(_CACHE)


def mu_cache_export():
    """Cache snapshot as JSON-ready records (all rationals as strings)."""
    with _CACHE_LOCK:
        items = list(_CACHE.items())
    out = []
    for (k, qrows, rays, vertex, order, meth), ser in items:
        out.append(
            {
                "k": k,
                "q": [[qstr(e) for e in row] for row in qrows],
                "rays": [[qstr(e) for e in r] for r in rays],
                "vertex": [qstr(e) for e in vertex],
                "order": order,
                "method": meth,
                "coeffs": [
                    [",".join(str(e) for e in a), qstr(c)]
                    for a, c in sorted(ser.coeffs.items())
                ],
            }
        )
    return out


def mu_cache_install(records):
    """Merge exported records back into the cache; returns the number of
    entries that were actually new."""
    added = 0
    for rec in records:
        k = int(rec["k"])
        order = int(rec["order"])
        key = (
            k,
            tuple(tuple(rat(e) for e in row) for row in rec["q"]),
            tuple(tuple(rat(e) for e in r) for r in rec["rays"]),
            tuple(rat(e) for e in rec["vertex"]),
            order,
            str(rec["method"]),
        )
        coeffs = {}
        for a, c in rec["coeffs"]:
            idx = tuple(int(e) for e in a.split(",")) if a else ()
            coeffs[idx] = rat(c)
        ser = TruncSeries(k, coeffs, order)
        with _CACHE_LOCK:
            if key not in _CACHE:
                _CACHE[key] = ser
                added += 1
    return added


# ---------------------------------------------------------------------------
# Bernoulli polynomials


class BernoulliPoly:
    """b(n, t) as an exact polynomial; coefficient i multiplies t^i."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs):
        self.n = n
        self.coeffs = tuple(coeffs)

    def at(self, t):
        t = rat(t)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __eq__(self, other):
        return isinstance(other, BernoulliPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return "BernoulliPoly(%d, %r)" % (self.n, self.coeffs)


_BPOLYS = []


def bernoulli_poly(n):
    """b(n, t) = sum_k C(n,k) B_k t^{n-k}, with the B_1 = -1/2 numbers."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    while len(_BPOLYS) <= n:
        m = len(_BPOLYS)
        nums = bernoulli_numbers(m)
        coeffs = [math.comb(m, j) * nums[m - j] for j in range(m + 1)]
        _BPOLYS.append(BernoulliPoly(m, coeffs))
    return _BPOLYS[n]


def _b_value(n, t):
    return bernoulli_poly(n).at(t)


# ---------------------------------------------------------------------------
# Dedekind sums


def dedekind_sum(q, p, r):
    """D(q, 1, p, r) = (1/q) sum_k zeta^{kr} / ((1-zeta^k)(1-zeta^{kp})).

    Evaluated through the sawtooth expression
        sum_{k=0}^{q-1} ((-(kp+r)/q)) ((k/q)) - 1/(4q)
    with ((a)) = a - floor(a) - 1/2 taken literally at integers; that
    convention is the one consistent with the root-of-unity definition.
    """
    q, p, r = int(q), int(p), int(r)
    if q < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(p, q) != 1:
        raise ValueError("p must be coprime to q")

    def saw(num, den):
        x = rat(num, den)
        return x - qfloor(x) - rat(1, 2)

    total = ZERO
    for k in range(q):
        total += saw(-(k * p + r), q) * saw(k, q)
    return total - rat(1, 4 * q)


# ---------------------------------------------------------------------------
# closed form in dimension one


def _b_series(t, order):
    """-sum_n b(n+1, t) z^n/(n+1)!: the germ of e^{tz}/(1-e^z) + 1/z."""
    fact = 1
    coeffs = {}
    for n in range(order + 1):
        fact *= n + 1
        coeffs[(n,)] = -_b_value(n + 1, t) / fact
    return TruncSeries(1, coeffs, order)


def _g_series(t, order):
    """-sum_n b(n, t) y^n/n!: the numerator germ y e^{ty}/(1-e^y)."""
    fact = 1
    coeffs = {}
    for n in range(order + 1):
        if n:
            fact *= n
        coeffs[(n,)] = -_b_value(n, t) / fact
    return TruncSeries(1, coeffs, order)


def mu_dim1_closed(s_frac, v, order):
    """mu of a half-line with fractional shift s_frac along the primitive
    direction v, as a series in the linear form <xi, v>."""
    s_frac = rat(s_frac)
    if not (0 <= s_frac < 1):
        raise ValueError("fractional shift must lie in [0, 1)")
    v = v if isinstance(v, QVector) else QVector(v)
    return _b_series(s_frac, order).substitute_linear(QMatrix([list(v.coords)]))


# ---------------------------------------------------------------------------
# closed form in dimension two


def _dim2_frame(a):
    """Rays, their lattice coordinates, and the vertex coordinates (s1, s2)
    in the ray basis, for a solid two-dimensional cone."""
    if len(a.rays) != 2 or a.space.dim != 2:
        raise ValueError("needs a cone with exactly two independent rays")
    v1, v2 = a.rays
    lat = a.space.lattice
    c1 = lat.coords(v1)
    c2 = lat.coords(v2)
    m = QMatrix.from_cols([v1, v2], nrows=a.space.ambient_dim)
    sc = m.solve(a.vertex)
    if sc is None:
        raise ValueError("vertex outside the span of the rays")
    return v1, v2, c1, c2, sc


def mu_dim2_unimodular_series(a, order):
    """The four-term closed form for a unimodular two-dimensional cone.

    With y_i = <xi, v_i>, tau_i the fractional shifts of the vertex and
    C_i = Q(v1,v2)/Q(v_i,v_i), the product of the two edge numerators plus
    the two cross Bernoulli series minus one is exactly divisible by y1 y2,
    and the quotient is mu.
    """
    v1, v2, c1, c2, sc = _dim2_frame(a)
    d = c1[0] * c2[1] - c1[1] * c2[0]
    if abs(d) != 1:
        raise ValueError("cone is not unimodular")
    t1 = ceil_frac(sc[0])
    t2 = ceil_frac(sc[1])
    q = a.space.q
    q12 = q.pair(v1, v2)
    cc1 = q12 / q.pair(v1, v1)
    cc2 = q12 / q.pair(v2, v2)
    tt = order + 2
    g1 = _g_series(t1, tt).substitute_linear(QMatrix([[1, 0]]))
    g2 = _g_series(t2, tt).substitute_linear(QMatrix([[0, 1]]))
    y1 = TruncSeries.linear(QVector([1, 0]))
    y2 = TruncSeries.linear(QVector([0, 1]))
    b2 = _b_series(t2, tt - 1).substitute_linear(QMatrix([[-cc1, ONE]]))
    b1 = _b_series(t1, tt - 1).substitute_linear(QMatrix([[ONE, -cc2]]))
    num = g1 * g2 + y2 * b2 + y1 * b1 - TruncSeries.const(1, 2, tt)
    num = divide_by_linear_form(num, QVector([1, 0]))
    num = divide_by_linear_form(num, QVector([0, 1]))
    p = QMatrix([list(v1.coords), list(v2.coords)])
    return num.substitute_linear(p)


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    return old_r, old_s, old_t


def mu_dim2_value0(a, q=None):
    """Value of mu at xi = 0 for a pointed two-dimensional cone, through the
    explicit formula with a Dedekind sum.

    In lattice coordinates with det(v1, v2) = q > 0, det(v1, w) = 1 and
    p = det(v2, w):

        (1/q)(1/2 - [[q s1]])(1/2 - [[q s2]])
        + (C1/q)(1/12 - [[q s2]]/2 + [[q s2]]^2/2)
        + (C2/q)(1/12 - [[q s1]]/2 + [[q s1]]^2/2)
        + D(q, 1, p, r),    r = ceil(q s1) + p ceil(q s2).

    The 1/q on the two cross terms comes from the constant coefficient of
    (1/y1) B((y2 - C1 y1)/q, .): the inner division by q survives into the
    value.  Dropping it changes nothing when q = 1 but breaks every
    non-unimodular case, as the series routes confirm.
    """
    if not a.is_pointed:
        raise ValueError("needs a pointed cone")
    v1, v2, c1, c2, sc = _dim2_frame(a)
    s1, s2 = sc[0], sc[1]
    det = c1[0] * c2[1] - c1[1] * c2[0]
    if det < 0:
        v1, v2, c1, c2 = v2, v1, c2, c1
        s1, s2 = s2, s1
        det = -det
    qq = q if q is not None else a.space.q
    qdet = int(det)
    t1 = ceil_frac(qdet * s1)
    t2 = ceil_frac(qdet * s2)
    q12 = qq.pair(v1, v2)
    cc1 = q12 / qq.pair(v1, v1)
    cc2 = q12 / qq.pair(v2, v2)
    g, x, y = _xgcd(int(c1[0]), int(c1[1]))
    if g < 0:
        g, x, y = -g, -x, -y
    if g != 1:
        raise AssertionError("stored rays must be primitive")
    w = (-y, x)
    p = int(c2[0]) * w[1] - int(c2[1]) * w[0]
    r = int(qdet * s1 + t1) + p * int(qdet * s2 + t2)
    half = rat(1, 2)
    value = (half - t1) * (half - t2) / qdet
    value += cc1 * (rat(1, 12) - t2 / 2 + t2 * t2 / 2) / qdet
    value += cc2 * (rat(1, 12) - t1 / 2 + t1 * t1 / 2) / qdet
    return value + dedekind_sum(qdet, p, r)


# ---------------------------------------------------------------------------
# the general construction


class MuResult:
    """mu of a cone: an analytic series in the ambient dual coordinates."""

    __slots__ = ("cone", "series", "order")

    def __init__(self, cone, series, order):
        self.cone = cone
        self.series = series
        self.order = order

    def __repr__(self):
        return "MuResult(order=%d, %s)" % (self.order, self.series.pretty())


def mu_cone(a, order, method="auto"):
    """mu of an arbitrary rational affine cone, to the requested order.

    method selects how solid cones are evaluated once reduced to the
    saturated lattice of their span: "closed" uses the dimension 1 and 2
    formulas (valid up to dimension two), "recursion" assembles the
    defining relation from lattice-sum and integral germs of the cone as
    a whole, "barvinok" runs the same relation per signed unimodular
    piece (index-1 lattice sums are single closed-form germs, so the
    common-denominator growth of "recursion" never appears), and "auto"
    picks the closed forms up to dimension two and "barvinok" above.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    return MuResult(a, _mu_series(a, order, method), order)


def _mu_series(a, order, method="auto"):
    """mu as a series in the dual of the cone's ambient space."""
    n = a.space.ambient_dim
    _check_dim(n)
    if a.contains_line:
        return TruncSeries.zero(n, order)
    lat = a.space.lattice
    if not a.rays:
        value = 1 if lat.contains(a.vertex) else 0
        return TruncSeries.const(value, n, order)
    wcols = span_lattice_basis(a.space, list(a.rays))
    w = QMatrix.from_cols(wcols, nrows=n)
    x0 = _span_lattice_point(a.vertex, lat, w)
    if x0 is None:
        # the affine span misses the lattice entirely
        return TruncSeries.zero(n, order)
    k = len(wcols)
    sigma = w.solve(a.vertex - x0)
    rcols = [w.solve(r) for r in a.rays]
    gram = w.transpose().matmat(a.space.q.matrix).matmat(w)
    inner_space = RationalSpace.standard(k, q=ScalarProduct(gram))
    inner = AffineCone(inner_space, sigma, rcols)
    ser = _mu_inner(inner, order, method)
    return ser.substitute_linear(w.transpose())


def _mu_inner(a, order, method):
    """mu of a solid pointed cone over the standard lattice, cached modulo
    integer translations of the vertex."""
    k = a.space.ambient_dim
    shift = QVector([qfloor(e) for e in a.vertex])
    rays = list(a.rays)
    if k == 2 and not a.is_simplicial:
        rays = extreme_rays(rays)
    ac = AffineCone(a.space, a.vertex - shift, rays)
    meth = method
    if meth == "auto":
        meth = "closed" if k <= 2 else "barvinok"
    if meth == "closed" and k > 2:
        raise ValueError("no closed form above dimension two")
    if meth not in ("closed", "recursion", "barvinok"):
        raise ValueError("unknown method %r" % (meth,))
    key = (
        k,
        a.space.q.matrix.rows,
        tuple(r.coords for r in ac.rays),
        ac.vertex.coords,
        order,
        meth,
    )
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    if meth == "closed":
        ser = _mu_closed_low_dim(ac, order)
    elif meth == "barvinok":
        ser = _mu_barvinok(ac, order)
    else:
        ser = _mu_recursion(ac, order)
    ser = ser.truncate(order)
    with _CACHE_LOCK:
        _CACHE[key] = ser
    return ser


def _mu_closed_low_dim(ac, order):
    k = ac.space.ambient_dim
    if k == 1:
        r0 = ac.rays[0][0]
        s0 = ac.vertex[0]
        if r0 > 0:
            return mu_dim1_closed(ceil_frac(s0), QVector([ONE]), order)
        return mu_dim1_closed(ceil_frac(-s0), QVector([-ONE]), order)
    # signed unimodular pieces: the corrections polarize to cones with
    # lines, on which mu vanishes, so the signed sum is exact
    total = TruncSeries.zero(2, order)
    for eps, u in barvinok_decompose(ac):
        total = total + mu_dim2_unimodular_series(u, order).scale(eps)
    return total


def _face_dim(ac, fs):
    return QMatrix.from_cols([ac.rays[i] for i in sorted(fs)], nrows=ac.space.ambient_dim).rank()


def _mu_barvinok(ac, order):
    # same valuation argument as the dimension-2 fast path: discarded
    # overlaps re-polarize to cones with lines, where mu vanishes
    k = ac.space.ambient_dim
    total = TruncSeries.zero(k, order)
    for eps, u in barvinok_decompose(ac):
        total = total + _mu_recursion(u, order).scale(eps)
    return total


def _mu_recursion(ac, order):
    """Assemble mu from the defining relation: e^{-<xi,s>} (S(a) minus the
    transverse-mu-weighted integral germs of the positive-dimensional
    faces) must come out analytic."""
    k = ac.space.ambient_dim
    total = germ_zero(k, order)
    for fs in faces_of_cone(ac):
        if not fs:
            continue
        d = _face_dim(ac, fs)
        tcone = cone_transverse_cone(ac, fs)
        mu_t = _mu_series(tcone, order + d, "auto")
        iface = i_cone(subcone(ac, fs), order)
        total = germ_add(total, germ_mul(germ_from_series(mu_t), iface))
    g = germ_sub(s_cone(ac, order), total)
    num = g.num * series_exp_linear(-ac.vertex, g.num.order, k)
    return to_analytic(MeroGerm(num, g.den)).truncate(order)


# ---------------------------------------------------------------------------
# the dual-side valuation


def mu_star(sigma, s, order):
    """mu of (s + dual cone of sigma) projected modulo the orthogonal
    complement of span(sigma), as a series in the ambient coordinates.

    Summing this quantity over the full-dimensional cones of a subdivision
    of sigma reproduces the value on sigma itself; lower-dimensional
    pieces never contribute.
    """
    if not sigma.vertex.is_zero():
        raise ValueError("sigma must be a linear cone, with vertex 0")
    sp = sigma.space
    n = sp.ambient_dim
    s = s if isinstance(s, QVector) else QVector(s)
    star_gens = dual_cone(list(sigma.rays), n)
    if sigma.rays:
        perp = QMatrix([list(r.coords) for r in sigma.rays]).nullspace()
    else:
        perp = [QVector.unit(n, i) for i in range(n)]
    lb = QMatrix.from_cols(perp, nrows=n)
    vspace = RationalSpace.standard(n, q=sp.q)
    qspace = quotient_lattice(vspace, lb)
    proj = orthogonal_projection(vspace, lb)
    imgs = []
    for gvec in star_gens:
        img = proj.matvec(gvec)
        if not img.is_zero():
            imgs.append(img)
    if imgs:
        rays = [primitive_vector(r, qspace.lattice) for r in extreme_rays(imgs)]
    else:
        rays = []
    cone = AffineCone(qspace, proj.matvec(s), rays)
    return _mu_series(cone, order)
