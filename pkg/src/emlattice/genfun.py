"""Exponential sums and integrals of affine cones as meromorphic germs.

S(a) is the germ of sum over lattice points of a of e^{<xi,x>}; I(a) the
germ of the integral against the lattice-normalized measure on span(a).
Both vanish identically on cones containing lines, which is what makes the
signed decompositions below exact at germ level.
"""

from __future__ import annotations

import random

from .exactlin import (
    Lattice,
    QMatrix,
    QVector,
    RationalSpace,
    primitive_vector,
    qceil,
    rat,
    solve_integer,
)
from .germ import (
    MeroGerm,
    TruncSeries,
    germ_add,
    germ_from_series,
    germ_zero,
    series_exp_linear,
    series_f,
    substitute_linear,
    to_analytic,
)
from .polycone import (
    AffineCone,
    barvinok_decompose,
    box_points,
    cone_index,
    dual_cone,
    span_lattice_basis,
    tangent_cone,
    triangulate_cone,
)

# largest triangulation-piece index the enumerating strategy will take on
DIRECT_INDEX_LIMIT = 200

_VISIBILITY_SEED = 20260822


def i_cone(a, order):
    """Integral germ of a solid affine cone in its own span.

    Simplicial pieces contribute (-1)^k vol * e^{<xi,s>} / prod <xi, v_i>;
    overlaps of the edge triangulation are null sets, so pieces just add.
    """
    n = a.space.ambient_dim
    if a.contains_line:
        return germ_zero(n, order)
    if not a.rays:
        return germ_from_series(series_exp_linear(a.vertex, order, n))
    total = germ_zero(n, order)
    for p in triangulate_cone(a):
        k = len(p.rays)
        vol = cone_index(p)
        num = series_exp_linear(p.vertex, order + k, n).scale(rat((-1) ** k * vol))
        total = germ_add(total, MeroGerm(num, list(p.rays)))
    return total


def _f_of_form(r, order):
    """F(<xi,r>) with F(z) = z/(1-e^z)."""
    return series_f(order).substitute_linear(QMatrix([list(r.coords)]))


def _span_lattice_point(vertex, lat, w):
    """Some lattice point in vertex + colspan(w), or None."""
    nvs = w.transpose().nullspace()
    if not nvs:
        return QVector.zero(w.nrows)
    bm = lat.basis_matrix()
    rows = [[nv.dot(bm.col(j)) for j in range(bm.ncols)] for nv in nvs]
    rhs = QVector([nv.dot(vertex) for nv in nvs])
    u = solve_integer(QMatrix(rows), rhs)
    if u is None:
        return None
    return lat.from_coords(u)


def _s_direct(inner, tri, order):
    """Half-open triangulation route: every piece keeps exactly the facets
    visible from one generic interior point, so lattice points are counted
    once; each piece is a plain box-points-times-geometric-factors germ."""
    k = inner.space.ambient_dim
    lat = Lattice.standard(k)
    ginvs = [QMatrix.from_cols(list(t.rays), nrows=k).inverse() for t in tri]
    rng = random.Random(_VISIBILITY_SEED)
    while True:
        z = QVector.zero(k)
        for r in inner.rays:
            z = z + r.scale(rng.randrange(1, 1000))
        vals = [gi.matvec(z) for gi in ginvs]
        if all(e != 0 for v in vals for e in v):
            break
    total = germ_zero(k, order)
    for t, v in zip(tri, vals):
        mask = frozenset(i for i, e in enumerate(v) if e < 0)
        pts = box_points(t.vertex, list(t.rays), lat, halfopen_mask=mask)
        acc = TruncSeries.zero(k, order + k)
        for b in pts:
            acc = acc + series_exp_linear(b, order + k, k)
        num = acc
        for r in t.rays:
            num = num * _f_of_form(r, order + k)
        total = germ_add(total, MeroGerm(num, list(t.rays)))
    return total


def _s_unimodular(u, order):
    k = u.space.ambient_dim
    g = QMatrix.from_cols(list(u.rays), nrows=k)
    c = g.inverse().matvec(u.vertex)
    first = g.matvec(QVector([qceil(e) for e in c]))
    num = series_exp_linear(first, order + k, k)
    for r in u.rays:
        num = num * _f_of_form(r, order + k)
    return MeroGerm(num, list(u.rays))


def _s_barvinok(inner, order):
    """Signed unimodular route.  A non-simplicial cone is triangulated on the
    polar side first, so both the triangulation overlaps and the decomposition
    remainders polarize back to cones with lines and drop out of S."""
    k = inner.space.ambient_dim
    lat = Lattice.standard(k)
    if inner.is_simplicial:
        simplicial = [inner]
    else:
        duals = dual_cone(list(inner.rays), k)
        dc = AffineCone(inner.space, QVector.zero(k), duals)
        simplicial = []
        for dpiece in triangulate_cone(dc):
            dmat = QMatrix.from_cols(list(dpiece.rays), nrows=k)
            inv_t = dmat.inverse().transpose()
            prim = [primitive_vector(inv_t.col(j), lat) for j in range(k)]
            simplicial.append(AffineCone(inner.space, inner.vertex, prim))
    total = germ_zero(k, order)
    for piece in simplicial:
        for eps, u in barvinok_decompose(piece):
            total = germ_add(total, _s_unimodular(u, order).scale(eps))
    return total


def s_cone(a, order, strategy="auto"):
    """Lattice-sum germ of an affine cone.

    The cone is first moved to coordinates on the saturated lattice of its
    span (an empty intersection of the affine span with the lattice gives the
    zero germ); strategies diverge only inside those coordinates.
    """
    n = a.space.ambient_dim
    if a.contains_line:
        return germ_zero(n, order)
    lat = a.space.lattice
    if not a.rays:
        if lat.contains(a.vertex):
            return germ_from_series(series_exp_linear(a.vertex, order, n))
        return germ_zero(n, order)
    wcols = span_lattice_basis(a.space, list(a.rays))
    w = QMatrix.from_cols(wcols, nrows=n)
    x0 = _span_lattice_point(a.vertex, lat, w)
    if x0 is None:
        return germ_zero(n, order)
    k = len(wcols)
    sigma = w.solve(a.vertex - x0)
    rcols = [w.solve(r) for r in a.rays]
    inner = AffineCone(RationalSpace.standard(k), sigma, rcols)
    tri = triangulate_cone(inner)
    if strategy == "auto":
        worst = max(cone_index(t) for t in tri)
        strategy = "direct" if worst <= DIRECT_INDEX_LIMIT else "barvinok"
    if strategy == "direct":
        inner_germ = _s_direct(inner, tri, order)
    elif strategy == "barvinok":
        inner_germ = _s_barvinok(inner, order)
    else:
        raise ValueError("unknown strategy %r" % (strategy,))
    g = substitute_linear(inner_germ, w.transpose())
    num = g.num * series_exp_linear(x0, g.num.order, n)
    return MeroGerm(num, g.den)


def brion_sum_S(p, order, strategy="auto"):
    """Sum of the tangent-cone S-germs over the vertices of a polytope; the
    poles cancel and the analytic part generates the lattice points of p."""
    total = germ_zero(p.space.ambient_dim, order)
    for v in p.vertices:
        total = germ_add(total, s_cone(tangent_cone(p, v), order, strategy))
    return total


def count_lattice_points(p, strategy="auto"):
    g = brion_sum_S(p, 0, strategy)
    c = to_analytic(g).coeff((0,) * p.space.ambient_dim)
    if c.denominator != 1 or c < 0:
        raise AssertionError("lattice point count came out %s" % (c,))
    return int(c)
