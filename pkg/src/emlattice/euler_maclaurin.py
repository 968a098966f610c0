"""Exact summation of a polynomial over the lattice points of a rational
polytope, split into one share per face.

Each face carries a constant-coefficient differential operator whose symbol
is the mu series of the face's transverse cone, lifted to the ambient dual
coordinates.  Applying the operator to the polynomial and integrating over
the face, with the measure normalized by the lattice of the face's direction
space, gives the face's share; the shares add up to the lattice sum.  The
shares are local: faces with translation-equivalent transverse cones receive
identical operators no matter which polytope they belong to.

A direct enumeration oracle over the bounding box is included, capped by
EMLATTICE_MAX_ENUM (default ten million candidate points).
"""

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor

from .exactlin import (
    QMatrix,
    QVector,
    RationalSpace,
    ScalarProduct,
    qceil,
    qfloor,
    rat,
    qstr,
)
from .mu import mu_cone
from .polycone import span_lattice_basis, transverse_cone


class EnumerationCapError(Exception):
    """Bounding box holds more candidate points than the configured cap."""


def enumeration_cap():
    raw = os.environ.get("EMLATTICE_MAX_ENUM")
    if raw is None:
        return 10**7
    cap = int(raw)
    if cap <= 0:
        raise ValueError("EMLATTICE_MAX_ENUM must be positive")
    return cap


class Polynomial:
    """Polynomial with exact rational coefficients, stored sparsely as a
    multi-index table."""

    __slots__ = ("dim", "table")

    def __init__(self, dim, table=None):
        dim = int(dim)
        if dim < 0:
            raise ValueError("negative dimension")
        self.dim = dim
        acc = {}
        for a, c in (table or {}).items():
            a = tuple(int(e) for e in a)
            if len(a) != dim:
                raise ValueError("multi-index length does not match dim")
            if any(e < 0 for e in a):
                raise ValueError("negative exponent")
            acc[a] = acc.get(a, rat(0)) + rat(c)
        self.table = {a: c for a, c in acc.items() if c != 0}

    @classmethod
    def zero(cls, dim):
        return cls(dim, {})

    @classmethod
    def constant(cls, dim, c):
        return cls(dim, {(0,) * dim: rat(c)})

    @classmethod
    def monomial(cls, dim, exps, c=1):
        return cls(dim, {tuple(exps): rat(c)})

    def is_zero(self):
        return not self.table

    def degree(self):
        """Total degree; 0 for the zero polynomial."""
        return max((sum(a) for a in self.table), default=0)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.dim == other.dim
            and self.table == other.table
        )

    def __add__(self, other):
        if not isinstance(other, Polynomial) or other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.table)
        for a, c in other.table.items():
            out[a] = out.get(a, rat(0)) + c
        return Polynomial(self.dim, out)

    def __neg__(self):
        return Polynomial(self.dim, {a: -c for a, c in self.table.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = rat(c)
        return Polynomial(self.dim, {a: c * v for a, v in self.table.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = {}
        for a, ca in self.table.items():
            for b, cb in other.table.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, rat(0)) + ca * cb
        return Polynomial(self.dim, out)

    __rmul__ = __mul__

    def evaluate(self, x):
        coords = x.coords if isinstance(x, QVector) else tuple(x)
        if len(coords) != self.dim:
            raise ValueError("point dimension mismatch")
        vals = [rat(c) for c in coords]
        pows = [{0: rat(1)} for _ in range(self.dim)]

        def power(i, e):
            t = pows[i]
            if e not in t:
                k = max(t)
                v = t[k]
                while k < e:
                    v = v * vals[i]
                    k += 1
                    t[k] = v
            return t[e]

        total = rat(0)
        for a, c in self.table.items():
            term = c
            for i, e in enumerate(a):
                if e:
                    term = term * power(i, e)
            total += term
        return total

    def diff(self, i):
        if not 0 <= i < self.dim:
            raise ValueError("variable index out of range")
        out = {}
        for a, c in self.table.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return Polynomial(self.dim, out)

    def derivative(self, alpha):
        """d^alpha applied in one pass, with exact falling factorials."""
        alpha = tuple(int(e) for e in alpha)
        if len(alpha) != self.dim:
            raise ValueError("multi-index length does not match dim")
        out = {}
        for a, c in self.table.items():
            coef = c
            ok = True
            for ai, di in zip(a, alpha):
                if ai < di:
                    ok = False
                    break
                if di:
                    coef = coef * math.perm(ai, di)
            if ok:
                out[tuple(x - y for x, y in zip(a, alpha))] = coef
        return Polynomial(self.dim, out)

    def substitute_affine(self, offset, m):
        """Composition with x = offset + m t: a polynomial in m.ncols new
        variables.  Per-variable power tables are built incrementally, so a
        dense input costs one polynomial product per table step plus one
        per monomial."""
        coords = offset.coords if isinstance(offset, QVector) else tuple(offset)
        if len(coords) != self.dim or m.nrows != self.dim:
            raise ValueError("affine map does not match the polynomial")
        k = m.ncols
        maxexp = [0] * self.dim
        for a in self.table:
            for i, e in enumerate(a):
                if e > maxexp[i]:
                    maxexp[i] = e
        pows = []
        for i in range(self.dim):
            if maxexp[i] == 0:
                pows.append(None)
                continue
            tab = {(0,) * k: rat(coords[i])}
            for j in range(k):
                key = tuple(1 if jj == j else 0 for jj in range(k))
                c = m.col(j).coords[i]
                if c != 0:
                    tab[key] = rat(c)
            lin = Polynomial(k, tab)
            table = [Polynomial.constant(k, 1)]
            for _ in range(maxexp[i]):
                table.append(table[-1] * lin)
            pows.append(table)
        out = Polynomial.zero(k)
        for a, c in self.table.items():
            term = Polynomial.constant(k, c)
            for i, e in enumerate(a):
                if e:
                    term = term * pows[i][e]
            out = out + term
        return out

    def pretty(self):
        if not self.table:
            return "0"
        parts = []
        for a in sorted(self.table, key=lambda t: (sum(t), t)):
            c = self.table[a]
            vars_part = "*".join(
                "x%d" % (i + 1) if e == 1 else "x%d^%d" % (i + 1, e)
                for i, e in enumerate(a)
                if e
            )
            if not vars_part:
                parts.append(qstr(c))
            elif c == 1:
                parts.append(vars_part)
            elif c == -1:
                parts.append("-" + vars_part)
            else:
                parts.append("%s*%s" % (qstr(c), vars_part))
        text = parts[0]
        for piece in parts[1:]:
            if piece.startswith("-"):
                text += " - " + piece[1:]
            else:
                text += " + " + piece
        return text

    def __repr__(self):
        return "Polynomial(%s)" % self.pretty()


class FaceOperator:
    """Constant-coefficient operator attached to a face of a polytope.

    The symbol is a truncated series in the ambient dual coordinates; its
    variables only involve directions Q-orthogonal to the face, so applying
    the operator differentiates across the face, never along it."""

    __slots__ = ("face", "symbol", "order")

    def __init__(self, face, symbol, order):
        self.face = face
        self.symbol = symbol
        self.order = int(order)

    @property
    def nu(self):
        """Constant term of the symbol."""
        return self.symbol.coeff((0,) * self.symbol.dim)

    def __repr__(self):
        return "FaceOperator(dim=%d, order=%d, nu=%s)" % (
            self.face.dim,
            self.order,
            qstr(self.nu),
        )


def face_operator(p, f, order):
    """Operator of the face f of p, with the symbol truncated at the given
    order.  The order must be at least the degree of any polynomial the
    operator will be applied to."""
    if f.owner is not p:
        raise ValueError("face does not belong to this polytope")
    series = mu_cone(transverse_cone(p, f), order).series
    return FaceOperator(f, series, order)


def apply_operator(op, h):
    """Sum of c_A d^A h over the symbol's coefficient table."""
    if h.dim != op.symbol.dim:
        raise ValueError("polynomial dimension does not match the symbol")
    if op.order < h.degree():
        raise ValueError(
            "operator order %d is below the polynomial degree %d"
            % (op.order, h.degree())
        )
    out = Polynomial.zero(h.dim)
    for alpha in sorted(op.symbol.coeffs, key=lambda t: (sum(t), t)):
        g = h.derivative(alpha)
        if g.table:
            out = out + g.scale(op.symbol.coeffs[alpha])
    return out


def _triangulate_face(f):
    """Pulling triangulation of a face: cone the coordinatewise-least vertex
    over the recursively triangulated facets that avoid it.  The anchor rule
    depends only on the face, so a facet shared by two parents triangulates
    identically in both."""
    p = f.owner
    subset = sorted(f.vertex_subset)
    if len(subset) == f.dim + 1:
        return [tuple(subset)]
    anchor = min(subset, key=lambda i: p.vertices[i].coords)
    out = []
    for g in p.faces:
        if g.dim != f.dim - 1 or not g.vertex_subset < f.vertex_subset:
            continue
        if anchor in g.vertex_subset:
            continue
        for s in _triangulate_face(g):
            out.append(tuple(sorted(s + (anchor,))))
    out.sort()
    return out


def integrate_over_face(f, g):
    """Exact integral of g over the face, with respect to the Lebesgue
    measure normalized by the lattice points of the face's direction space.

    The face is triangulated; on each simplex the polynomial is rewritten in
    barycentric coordinates and monomials integrate through the factorial
    identity, weighted by the simplex determinant in a lattice basis of the
    span."""
    p = f.owner
    if g.dim != p.space.ambient_dim:
        raise ValueError("polynomial dimension does not match the polytope")
    verts = p.vertices
    k = f.dim
    if k == 0:
        return g.evaluate(verts[min(f.vertex_subset)])
    vi = sorted(f.vertex_subset)
    base = verts[vi[0]]
    lb = span_lattice_basis(p.space, [verts[i] - base for i in vi[1:]])
    if len(lb) != k:
        raise AssertionError("face span rank does not match its dimension")
    lbm = QMatrix.from_cols(lb, nrows=p.space.ambient_dim)
    total = rat(0)
    for simplex in _triangulate_face(f):
        u0 = verts[simplex[0]]
        edges = [verts[i] - u0 for i in simplex[1:]]
        cols = []
        for e in edges:
            c = lbm.solve(e)
            if c is None:
                raise AssertionError("simplex edge left the face span")
            cols.append(c)
        d = QMatrix.from_cols(cols, nrows=k).det()
        if d == 0:
            raise AssertionError("degenerate simplex in the triangulation")
        gt = g.substitute_affine(
            u0, QMatrix.from_cols(edges, nrows=p.space.ambient_dim)
        )
        scale = abs(d)
        for a, c in gt.table.items():
            num = 1
            for e in a:
                num *= math.factorial(e)
            total += scale * c * rat(num, math.factorial(sum(a) + k))
    return total


class FaceContribution:
    """One row of a report: the face, its operator's constant term, and the
    integral of the operator applied to the polynomial."""

    __slots__ = ("face", "dim", "nu", "value")

    def __init__(self, face, nu, value):
        self.face = face
        self.dim = face.dim
        self.nu = nu
        self.value = value

    def __repr__(self):
        return "FaceContribution(dim=%d, nu=%s, value=%s)" % (
            self.dim,
            qstr(self.nu),
            qstr(self.value),
        )


def _row_key(row):
    return (row.dim, tuple(sorted(v.coords for v in row.face.vertices)))


class ContributionReport:
    """Per-face shares of a lattice sum.  Rows are sorted by dimension and
    then by the face's vertex coordinates, so the report does not depend on
    input vertex order or scheduling."""

    __slots__ = ("rows", "total")

    def __init__(self, rows):
        self.rows = tuple(sorted(rows, key=_row_key))
        total = rat(0)
        for r in self.rows:
            total += r.value
        self.total = total

    def rows_of_dim(self, d):
        return [r for r in self.rows if r.dim == d]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return "ContributionReport(faces=%d, total=%s)" % (
            len(self.rows),
            qstr(self.total),
        )


def _with_scalar_product(p, q):
    if isinstance(q, ScalarProduct):
        sp = q
    elif isinstance(q, QMatrix):
        sp = ScalarProduct(q)
    else:
        sp = ScalarProduct(QMatrix([[rat(str(c)) for c in row] for row in q]))
    space = RationalSpace.standard(p.space.ambient_dim, q=sp)
    from .polycone import build_polytope

    return build_polytope(space, p.vertices)


def em_sum(p, h, q=None, jobs=None):
    """Lattice sum of h over p as a per-face contribution report.

    The operator order is the degree of h; higher derivatives annihilate h,
    so nothing is lost to the truncation.  An optional scalar product
    replaces the one carried by the polytope's space.  jobs > 1 computes
    faces on a thread pool; the report is identical either way."""
    if h.dim != p.space.ambient_dim:
        raise ValueError("polynomial dimension does not match the polytope")
    if q is not None:
        p = _with_scalar_product(p, q)
    order = h.degree()

    def one(f):
        op = face_operator(p, f, order)
        g = apply_operator(op, h)
        return FaceContribution(f, op.nu, integrate_over_face(f, g))

    faces = list(p.faces)
    if jobs is not None and int(jobs) > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            rows = list(pool.map(one, faces))
    else:
        rows = [one(f) for f in faces]
    return ContributionReport(rows)


def brute_force_sum(p, h):
    """Oracle: enumerate the integer points of the bounding box, keep those
    inside p, and sum h.  Raises EnumerationCapError when the box holds more
    candidates than EMLATTICE_MAX_ENUM allows."""
    n = p.space.ambient_dim
    if h.dim != n:
        raise ValueError("polynomial dimension does not match the polytope")
    ranges = []
    count = 1
    for i in range(n):
        cs = [v.coords[i] for v in p.vertices]
        lo = qceil(min(cs))
        hi = qfloor(max(cs))
        ranges.append(range(lo, hi + 1))
        count *= max(0, hi - lo + 1)
    cap = enumeration_cap()
    if count > cap:
        raise EnumerationCapError(
            "bounding box holds %d candidate points, cap is %d" % (count, cap)
        )
    total = rat(0)
    for pt in itertools.product(*ranges):
        if p.contains(QVector([rat(c) for c in pt])):
            total += h.evaluate(pt)
    return total
