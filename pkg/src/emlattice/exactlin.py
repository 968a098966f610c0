"""Exact rational linear algebra: vectors, matrices, lattices, normal forms.

Everything downstream (cones, germs, mu-functions) builds on this module.
All arithmetic is exact; no floats anywhere.
"""

from __future__ import annotations

import math

try:
    from gmpy2 import mpq as _mpq

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _mpq

    HAVE_GMPY2 = False

#: the rational number type in use (gmpy2.mpq if available, else Fraction)
Rat = type(_mpq(0))

ZERO = _mpq(0)
ONE = _mpq(1)


def rat(a, b=None):
    """Exact rational from ints, 'p/q' strings, or existing rationals."""
    if b is None:
        if isinstance(a, str):
            return _mpq(a.strip())
        if isinstance(a, float):
            raise TypeError("floats are not accepted; use ints, strings or rationals")
        return _mpq(a)
    return _mpq(a) / _mpq(b)


def qstr(x):
    """Serialize a rational as 'p/q' (or 'p' when the denominator is 1)."""
    return str(_mpq(x))


def qfloor(x):
    x = _mpq(x)
    return int(x.numerator // x.denominator)


def qceil(x):
    return -qfloor(-_mpq(x))


def ceil_frac(s):
    """[[s]] = ceil(s) - s, in [0, 1)."""
    s = _mpq(s)
    return _mpq(qceil(s)) - s


def floor_frac(s):
    """{s} = s - floor(s), in [0, 1)."""
    s = _mpq(s)
    return s - _mpq(qfloor(s))


def qround(x):
    """Nearest integer, ties toward +infinity (floor(x + 1/2)); deterministic."""
    return qfloor(_mpq(x) + rat(1, 2))


def _lcm(a, b):
    return a // math.gcd(a, b) * b


def denominator_lcm(values):
    d = 1
    for v in values:
        d = _lcm(d, int(_mpq(v).denominator))
    return d


class QVector:
    """Vector with exact rational coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(_mpq(c) if not isinstance(c, str) else rat(c) for c in coords)

    @property
    def dim(self):
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __add__(self, other):
        return QVector([a + b for a, b in zip(self.coords, other.coords, strict=True)])

    def __sub__(self, other):
        return QVector([a - b for a, b in zip(self.coords, other.coords, strict=True)])

    def __neg__(self):
        return QVector([-a for a in self.coords])

    def scale(self, c):
        c = _mpq(c)
        return QVector([c * a for a in self.coords])

    __rmul__ = scale

    def dot(self, other):
        """Plain coordinate pairing (no scalar product)."""
        return sum((a * b for a, b in zip(self.coords, other.coords, strict=True)), ZERO)

    def is_zero(self):
        return all(a == 0 for a in self.coords)

    def __eq__(self, other):
        return isinstance(other, QVector) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "QVector(%s)" % (", ".join(qstr(c) for c in self.coords))

    @classmethod
    def zero(cls, n):
        return cls([0] * n)

    @classmethod
    def unit(cls, n, i):
        return cls([1 if j == i else 0 for j in range(n)])


class QMatrix:
    """Rectangular matrix with exact rational entries, stored row-major."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(_mpq(e) if not isinstance(e, str) else rat(e) for e in r) for r in rows)
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise ValueError("ragged rows")

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r, c):
        return cls([[0] * c for _ in range(r)])

    @classmethod
    def from_cols(cls, cols, nrows=None):
        cols = [QVector(c) if not isinstance(c, QVector) else c for c in cols]
        if not cols:
            if nrows is None:
                raise ValueError("empty column list needs nrows")
            return cls([[] for _ in range(nrows)])
        n = cols[0].dim
        return cls([[c[i] for c in cols] for i in range(n)])

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def row(self, i):
        return QVector(self.rows[i])

    def col(self, j):
        return QVector([r[j] for r in self.rows])

    def cols(self):
        return [self.col(j) for j in range(self.ncols)]

    def transpose(self):
        return QMatrix([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)])

    def matvec(self, v):
        return QVector([sum((r[j] * v[j] for j in range(self.ncols)), ZERO) for r in self.rows])

    def matmat(self, other):
        ot = other.transpose()
        return QMatrix(
            [
                [sum((a * b for a, b in zip(r, c, strict=True)), ZERO) for c in ot.rows]
                for r in self.rows
            ]
        )

    def __add__(self, other):
        return QMatrix(
            [[a + b for a, b in zip(r1, r2, strict=True)] for r1, r2 in zip(self.rows, other.rows, strict=True)]
        )

    def __sub__(self, other):
        return QMatrix(
            [[a - b for a, b in zip(r1, r2, strict=True)] for r1, r2 in zip(self.rows, other.rows, strict=True)]
        )

    def scale(self, c):
        c = _mpq(c)
        return QMatrix([[c * e for e in r] for r in self.rows])

    def is_integer(self):
        return all(e.denominator == 1 for r in self.rows for e in r)

    def _echelon(self):
        """Row echelon form; returns (matrix rows as lists, pivot column list)."""
        m = [list(r) for r in self.rows]
        pivots = []
        pr = 0
        for pc in range(self.ncols):
            sel = None
            for i in range(pr, len(m)):
                if m[i][pc] != 0:
                    sel = i
                    break
            if sel is None:
                continue
            m[pr], m[sel] = m[sel], m[pr]
            inv = ONE / m[pr][pc]
            m[pr] = [e * inv for e in m[pr]]
            for i in range(len(m)):
                if i != pr and m[i][pc] != 0:
                    f = m[i][pc]
                    m[i] = [a - f * b for a, b in zip(m[i], m[pr], strict=True)]
            pivots.append(pc)
            pr += 1
            if pr == len(m):
                break
        return m, pivots

    def rank(self):
        return len(self._echelon()[1])

    def det(self):
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        n = self.nrows
        m = [list(r) for r in self.rows]
        d = ONE
        for c in range(n):
            sel = None
            for i in range(c, n):
                if m[i][c] != 0:
                    sel = i
                    break
            if sel is None:
                return ZERO
            if sel != c:
                m[c], m[sel] = m[sel], m[c]
                d = -d
            d = d * m[c][c]
            inv = ONE / m[c][c]
            for i in range(c + 1, n):
                if m[i][c] != 0:
                    f = m[i][c] * inv
                    m[i] = [a - f * b for a, b in zip(m[i], m[c], strict=True)]
        return d

    def inverse(self):
        if self.nrows != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        m = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            sel = None
            for i in range(c, n):
                if m[i][c] != 0:
                    sel = i
                    break
            if sel is None:
                raise ValueError("singular matrix")
            m[c], m[sel] = m[sel], m[c]
            inv = ONE / m[c][c]
            m[c] = [e * inv for e in m[c]]
            for i in range(n):
                if i != c and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[c], strict=True)]
        return QMatrix([r[n:] for r in m])

    def solve(self, b):
        """Any exact solution x of self @ x = b, or None if inconsistent.

        Free variables are set to zero.
        """
        aug = QMatrix([list(r) + [b[i]] for i, r in enumerate(self.rows)])
        m, pivots = aug._echelon()
        n = self.ncols
        for i, r in enumerate(m):
            if all(e == 0 for e in r[:n]) and r[n] != 0:
                return None
        x = [ZERO] * n
        for i, pc in enumerate(pivots):
            if pc == n:
                return None
            x[pc] = m[i][n]
        return QVector(x)

    def nullspace(self):
        """Rational basis of the kernel {x : self @ x = 0}."""
        m, pivots = self._echelon()
        n = self.ncols
        free = [j for j in range(n) if j not in pivots]
        basis = []
        for f in free:
            x = [ZERO] * n
            x[f] = ONE
            for i, pc in enumerate(pivots):
                x[pc] = -m[i][f]
            basis.append(QVector(x))
        return basis

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "QMatrix(%s)" % ("; ".join(" ".join(qstr(e) for e in r) for r in self.rows))


def hermite_normal_form(m):
    """Column-style Hermite normal form of an integer matrix.

    Returns (H, U) with H = m @ U, U unimodular.  H is lower triangular in the
    staircase sense (pivot rows strictly increase with the column index),
    pivots are positive, entries left of a pivot in its row lie in [0, pivot),
    and zero columns are moved to the end.
    """
    if not m.is_integer():
        raise ValueError("hermite_normal_form needs integer entries")
    nr, nc = m.nrows, m.ncols
    a = [[int(m.rows[i][j]) for i in range(nr)] for j in range(nc)]  # columns
    u = [[1 if i == j else 0 for i in range(nc)] for j in range(nc)]
    c = 0
    for i in range(nr):
        if c == nc:
            break
        # gcd-reduce row i across columns >= c
        while True:
            best = None
            for j in range(c, nc):
                if a[j][i] != 0 and (best is None or abs(a[j][i]) < abs(a[best][i])):
                    best = j
            if best is None:
                break
            done = True
            for j in range(c, nc):
                if j != best and a[j][i] != 0:
                    q = a[j][i] // a[best][i]
                    if q:
                        a[j] = [x - q * y for x, y in zip(a[j], a[best], strict=True)]
                        u[j] = [x - q * y for x, y in zip(u[j], u[best], strict=True)]
                    if a[j][i] != 0:
                        done = False
            if done:
                break
        if best is None:
            continue
        if best != c:
            a[best], a[c] = a[c], a[best]
            u[best], u[c] = u[c], u[best]
        if a[c][i] < 0:
            a[c] = [-x for x in a[c]]
            u[c] = [-x for x in u[c]]
        p = a[c][i]
        for j in range(c):
            q = a[j][i] // p
            if q:
                a[j] = [x - q * y for x, y in zip(a[j], a[c], strict=True)]
                u[j] = [x - q * y for x, y in zip(u[j], u[c], strict=True)]
        c += 1
    h = QMatrix([[a[j][i] for j in range(nc)] for i in range(nr)])
    uu = QMatrix([[u[j][i] for j in range(nc)] for i in range(nc)])
    return h, uu


def integer_kernel(m):
    """Basis of the saturated integer kernel {c in Z^k : m @ c = 0}.

    Accepts a rational matrix; rows are cleared of denominators first.
    """
    rows = []
    for r in m.rows:
        d = denominator_lcm(r)
        rows.append([e * d for e in r])
    mi = QMatrix(rows) if rows else QMatrix.zeros(0, m.ncols)
    if mi.nrows == 0:
        return [QVector.unit(m.ncols, j) for j in range(m.ncols)]
    h, u = hermite_normal_form(mi)
    out = []
    for j in range(h.ncols):
        if all(h.rows[i][j] == 0 for i in range(h.nrows)):
            out.append(u.col(j))
    return out


def solve_integer(m, b):
    """A particular integer solution of m @ c = b, or None.

    m rational, b rational vector; scaled to an integer system first.
    """
    d = denominator_lcm([e for r in m.rows for e in r] + list(b))
    mi = QMatrix([[e * d for e in r] for r in m.rows])
    bi = QVector([e * d for e in b])
    h, u = hermite_normal_form(mi)
    # Solve h @ y = bi with y supported on pivot columns, then c = u @ y.
    y = [ZERO] * h.ncols
    residual = list(bi.coords)
    col = 0
    for i in range(h.nrows):
        if col < h.ncols and h.rows[i][col] != 0:
            q = residual[i] / h.rows[i][col]
            if q.denominator != 1:
                return None
            y[col] = q
            for k in range(h.nrows):
                residual[k] = residual[k] - q * h.rows[k][col]
            col += 1
    if any(r != 0 for r in residual):
        return None
    return u.matvec(QVector(y))


class ScalarProduct:
    """Symmetric positive definite rational bilinear form on the ambient space."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        if matrix.nrows != matrix.ncols:
            raise ValueError("scalar product matrix must be square")
        if matrix != matrix.transpose():
            raise ValueError("scalar product matrix must be symmetric")
        for k in range(1, matrix.nrows + 1):
            minor = QMatrix([r[:k] for r in matrix.rows[:k]])
            if minor.det() <= 0:
                raise ValueError("scalar product must be positive definite")
        self.matrix = matrix

    @classmethod
    def standard(cls, n):
        return cls(QMatrix.identity(n))

    @property
    def dim(self):
        return self.matrix.nrows

    def pair(self, x, y):
        return self.matrix.matvec(y).dot(x)

    def gram(self, vectors):
        return QMatrix([[self.pair(a, b) for b in vectors] for a in vectors])

    def __eq__(self, other):
        return isinstance(other, ScalarProduct) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)


class Lattice:
    """Lattice given by independent generators in ambient coordinates.

    The lattice is always of full rank inside its own span; rank-deficient
    generator lists are rejected.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim, basis):
        basis = [b if isinstance(b, QVector) else QVector(b) for b in basis]
        if any(b.dim != ambient_dim for b in basis):
            raise ValueError("basis vector dimension mismatch")
        if basis:
            if QMatrix.from_cols(basis).rank() != len(basis):
                raise ValueError("lattice generators must be independent")
        self.ambient_dim = ambient_dim
        self.basis = tuple(basis)

    @classmethod
    def standard(cls, n):
        return cls(n, [QVector.unit(n, i) for i in range(n)])

    @property
    def rank(self):
        return len(self.basis)

    def basis_matrix(self):
        return QMatrix.from_cols(self.basis, nrows=self.ambient_dim)

    def coords(self, v):
        """Rational coordinates of v in the basis, or None if v is off-span."""
        if not self.basis:
            return QVector([]) if v.is_zero() else None
        return self.basis_matrix().solve(v)

    def contains(self, v):
        c = self.coords(v)
        return c is not None and all(e.denominator == 1 for e in c)

    def from_coords(self, c):
        out = QVector.zero(self.ambient_dim)
        for ci, b in zip(c, self.basis, strict=True):
            out = out + b.scale(ci)
        return out

    def covolume_sq(self, q=None):
        """Squared covolume: det of the Gram matrix under q (default standard)."""
        if not self.basis:
            return ONE
        if q is None:
            q = ScalarProduct.standard(self.ambient_dim)
        return q.gram(list(self.basis)).det()

    def canonical_basis(self):
        """Canonical generators (HNF over a common denominator): equal lattices
        produce identical tuples."""
        if not self.basis:
            return ()
        d = denominator_lcm([e for b in self.basis for e in b])
        m = QMatrix.from_cols([b.scale(d) for b in self.basis], nrows=self.ambient_dim)
        h, _ = hermite_normal_form(m)
        cols = []
        for j in range(h.ncols):
            col = h.col(j)
            if not col.is_zero():
                cols.append(tuple(e / d for e in col))
        return tuple(cols)

    def __eq__(self, other):
        return (
            isinstance(other, Lattice)
            and self.ambient_dim == other.ambient_dim
            and self.canonical_basis() == other.canonical_basis()
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.canonical_basis()))

    def __repr__(self):
        return "Lattice(dim=%d, basis=%r)" % (self.ambient_dim, list(self.basis))


class RationalSpace:
    """A subspace W of the ambient rational space, with a lattice and a scalar
    product.

    Quotient spaces are realized concretely as embedded Q-orthocomplements in
    the same ambient coordinates, carrying the projected lattice, so the
    projected-lattice-vs-intersected-lattice distinction is encoded in the
    type and cannot be silently confused.
    """

    __slots__ = ("ambient_dim", "subspace_basis", "lattice", "q")

    def __init__(self, ambient_dim, subspace_basis, lattice, q):
        if subspace_basis.nrows != ambient_dim:
            raise ValueError("subspace basis must have ambient_dim rows")
        if subspace_basis.ncols and subspace_basis.rank() != subspace_basis.ncols:
            raise ValueError("subspace basis must have full column rank")
        if lattice.ambient_dim != ambient_dim:
            raise ValueError("lattice ambient dimension mismatch")
        if lattice.rank != subspace_basis.ncols:
            raise ValueError("lattice must have full rank in the subspace")
        for b in lattice.basis:
            if subspace_basis.ncols == 0:
                if not b.is_zero():
                    raise ValueError("lattice vector outside the subspace")
            elif subspace_basis.solve(b) is None:
                raise ValueError("lattice vector outside the subspace")
        if q.dim != ambient_dim:
            raise ValueError("scalar product dimension mismatch")
        self.ambient_dim = ambient_dim
        self.subspace_basis = subspace_basis
        self.lattice = lattice
        self.q = q

    @classmethod
    def standard(cls, n, q=None):
        return cls(
            n,
            QMatrix.identity(n),
            Lattice.standard(n),
            q if q is not None else ScalarProduct.standard(n),
        )

    @property
    def dim(self):
        return self.subspace_basis.ncols

    def contains(self, v):
        if self.dim == 0:
            return v.is_zero()
        return self.subspace_basis.solve(v) is not None

    def fingerprint(self):
        return (self.ambient_dim, self.lattice.canonical_basis(), self.q.matrix.rows)

    def __eq__(self, other):
        return isinstance(other, RationalSpace) and self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        return "RationalSpace(ambient=%d, dim=%d)" % (self.ambient_dim, self.dim)


def primitive_vector(v, lat):
    """Generator of the ray (R+ v) within lat: the shortest lattice vector on
    the ray through v."""
    if not isinstance(v, QVector):
        v = QVector(v)
    if v.is_zero():
        raise ValueError("primitive_vector of the zero vector")
    c = lat.coords(v)
    if c is None:
        raise ValueError("vector not in the span of the lattice")
    d = denominator_lcm(c)
    ints = [int(e * d) for e in c]
    g = 0
    for e in ints:
        g = math.gcd(g, e)
    scaled = QVector([rat(e, g) for e in ints])
    return lat.from_coords(scaled)


def orthogonal_projection(space, l_basis):
    """Ambient matrix of the Q-orthogonal projection of W onto the
    Q-orthocomplement of L = span(l_basis) inside W.

    P restricted to W is idempotent and Q-self-adjoint with kernel L; the
    returned ambient matrix also kills the Q-orthocomplement of W, so it is a
    genuine projection of the whole ambient space onto L^perp intersect W.
    """
    n = space.ambient_dim
    wb = space.subspace_basis
    if l_basis.ncols and l_basis.rank() != l_basis.ncols:
        raise ValueError("dependent columns in l_basis")
    for j in range(l_basis.ncols):
        if not space.contains(l_basis.col(j)):
            raise ValueError("l_basis column outside the space")
    if wb.ncols == 0:
        return QMatrix.zeros(n, n)
    # y-space conditions: columns of wb with l^T Q wb y = 0
    cond = l_basis.transpose().matmat(space.q.matrix).matmat(wb)
    ybasis = cond.nullspace() if l_basis.ncols else [QVector.unit(wb.ncols, j) for j in range(wb.ncols)]
    if not ybasis:
        return QMatrix.zeros(n, n)
    a = QMatrix.from_cols([wb.matvec(y) for y in ybasis], nrows=n)
    gram = a.transpose().matmat(space.q.matrix).matmat(a)
    return a.matmat(gram.inverse()).matmat(a.transpose()).matmat(space.q.matrix)


def quotient_lattice(space, l_basis):
    """The quotient W/L realized as the embedded Q-orthocomplement of L in W,
    equipped with the projection of the lattice of W."""
    n = space.ambient_dim
    p = orthogonal_projection(space, l_basis)
    # subspace basis of the complement
    cond = l_basis.transpose().matmat(space.q.matrix).matmat(space.subspace_basis)
    if l_basis.ncols:
        ybasis = cond.nullspace()
    else:
        ybasis = [QVector.unit(space.subspace_basis.ncols, j) for j in range(space.subspace_basis.ncols)]
    a_cols = [space.subspace_basis.matvec(y) for y in ybasis]
    a = QMatrix.from_cols(a_cols, nrows=n)
    # defensive rationality check: L cap Lambda must have rank dim L
    if l_basis.ncols:
        lat_m = space.lattice.basis_matrix()
        conds = []
        lperp = []
        # rational conditions for membership in span(l_basis): kill a basis of
        # the plain-orthogonal complement of L
        lt = l_basis.transpose()
        for nv in lt.nullspace():
            lperp.append(nv)
        for nv in lperp:
            conds.append([nv.dot(lat_m.col(j)) for j in range(lat_m.ncols)])
        if conds:
            kern = integer_kernel(QMatrix(conds))
        else:
            kern = [QVector.unit(lat_m.ncols, j) for j in range(lat_m.ncols)]
        if len(kern) != l_basis.ncols:
            raise ValueError("subspace is not rational for the lattice")
    if not a_cols:
        return RationalSpace(n, QMatrix.from_cols([], nrows=n), Lattice(n, []), space.q)
    # project the lattice generators and extract a lattice basis via HNF
    gens = [p.matvec(b) for b in space.lattice.basis]
    coords = []
    for g in gens:
        c = a.solve(g)
        if c is None:
            raise AssertionError("projected generator escaped the complement")
        coords.append(c)
    d = denominator_lcm([e for c in coords for e in c])
    gmat = QMatrix.from_cols([c.scale(d) for c in coords], nrows=len(ybasis))
    h, _ = hermite_normal_form(gmat)
    basis = []
    for j in range(h.ncols):
        col = h.col(j)
        if not col.is_zero():
            basis.append(a.matvec(col.scale(rat(1, d))))
    return RationalSpace(n, a, Lattice(n, basis), space.q)


def lll_reduce(lat, gram=None):
    """LLL-reduced basis of the same lattice (delta = 3/4, exact arithmetic)."""
    if gram is None:
        gram = ScalarProduct.standard(lat.ambient_dim)
    b = [QVector(v.coords) for v in lat.basis]
    n = len(b)
    if n <= 1:
        return Lattice(lat.ambient_dim, b)
    delta = rat(3, 4)

    def gso(vectors):
        star = []
        mu = [[ZERO] * n for _ in range(n)]
        norms = []
        for i, v in enumerate(vectors):
            w = QVector(v.coords)
            for j in range(i):
                mu[i][j] = gram.pair(v, star[j]) / norms[j]
                w = w - star[j].scale(mu[i][j])
            star.append(w)
            norms.append(gram.pair(w, w))
        return mu, norms

    mu, norms = gso(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            r = qround(mu[k][j])
            if r:
                b[k] = b[k] - b[j].scale(r)
                mu, norms = gso(b)
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gso(b)
            k = max(k - 1, 1)
    return Lattice(lat.ambient_dim, b)
