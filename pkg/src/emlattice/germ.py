"""Truncated multivariate Taylor series and meromorphic germs.

A MeroGerm is num / prod(linear forms), the computational stand-in for a
meromorphic function near 0 whose poles sit on finitely many hyperplanes.
Numerators are truncated series; every operation tracks how far the result
is valid.  Orders: an order of None means the series is exact (a polynomial);
an integer order m means coefficients of total degree <= m are correct and
higher ones are unknown.
"""

from __future__ import annotations

import math

from .exactlin import QMatrix, QVector, ScalarProduct, ZERO, ONE, denominator_lcm, qstr, rat


class NotDivisible(Exception):
    """Raised when a truncated series is not divisible by a linear form.

    The offending exponent (a multi-index surviving restriction to the
    hyperplane) is stored in .degree.
    """

    def __init__(self, degree, message=None):
        self.degree = degree
        super().__init__(message or "series not divisible by linear form (offending term %r)" % (degree,))


class OrderUnderflow(Exception):
    """Order bookkeeping ran out: inputs were built too shallow."""


def _omin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _oadd(a, b):
    if a is None or b is None:
        return None
    return a + b


class TruncSeries:
    """Sparse truncated power series with exact rational coefficients."""

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim, coeffs, order):
        self.dim = dim
        self.order = order
        clean = {}
        for a, c in coeffs.items():
            if c == 0:
                continue
            if order is not None and sum(a) > order:
                continue
            clean[a] = c
        self.coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dim, order):
        return cls(dim, {}, order)

    @classmethod
    def const(cls, value, dim, order=None):
        return cls(dim, {(0,) * dim: rat(value)}, order)

    @classmethod
    def linear(cls, v, order=None):
        v = v if isinstance(v, QVector) else QVector(v)
        coeffs = {}
        for i, c in enumerate(v):
            if c != 0:
                a = [0] * v.dim
                a[i] = 1
                coeffs[tuple(a)] = c
        return cls(v.dim, coeffs, order)

    # -- queries ------------------------------------------------------------

    def known_valuation(self):
        """Lower bound for the valuation: min degree of a stored term, else
        order+1 (or None = +infinity for the exact zero polynomial)."""
        if self.coeffs:
            return min(sum(a) for a in self.coeffs)
        return None if self.order is None else self.order + 1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, alpha):
        alpha = tuple(alpha)
        if self.order is not None and sum(alpha) > self.order:
            raise ValueError("coefficient of degree %d beyond tracked order %d" % (sum(alpha), self.order))
        return self.coeffs.get(alpha, ZERO)

    def eq_through(self, other, order):
        """Coefficientwise equality through total degree <= order."""
        for s in (self, other):
            if s.order is not None and s.order < order:
                raise ValueError("series order %s too shallow for comparison through %d" % (s.order, order))
        keys = set(self.coeffs) | set(other.coeffs)
        for a in keys:
            if sum(a) <= order and self.coeffs.get(a, ZERO) != other.coeffs.get(a, ZERO):
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, TruncSeries)
            and self.dim == other.dim
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.dim, self.order, tuple(sorted(self.coeffs.items()))))

    # -- arithmetic ----------------------------------------------------------

    def truncate(self, order):
        if self.order is not None and order is not None and order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TruncSeries(self.dim, self.coeffs, order)

    def __add__(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, ZERO) + c
        return TruncSeries(self.dim, out, _omin(self.order, other.order))

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = rat(c)
        if c == 0:
            return TruncSeries(self.dim, {}, self.order)
        return TruncSeries(self.dim, {a: c * v for a, v in self.coeffs.items()}, self.order)

    def __mul__(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        order = _omin(_oadd(self.order, other.known_valuation()), _oadd(other.order, self.known_valuation()))
        out = {}
        items = sorted(other.coeffs.items(), key=lambda kv: sum(kv[0]))
        for a, ca in sorted(self.coeffs.items(), key=lambda kv: sum(kv[0])):
            da = sum(a)
            for b, cb in items:
                if order is not None and da + sum(b) > order:
                    break
                key = tuple(x + y for x, y in zip(a, b, strict=True))
                v = out.get(key)
                out[key] = ca * cb if v is None else v + ca * cb
        return TruncSeries(self.dim, out, order)

    def pow(self, k):
        out = TruncSeries.const(1, self.dim, None)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- substitution --------------------------------------------------------

    def substitute_linear(self, p):
        """The series xi -> self(P xi); old variable i becomes the linear form
        given by row i of P.  Implemented by per-variable Horner grouping to
        keep the operation count near (#terms x #result terms)."""
        if p.nrows != self.dim:
            raise ValueError("substitution matrix must have one row per variable")
        new_dim = p.ncols
        order = self.order
        forms = [TruncSeries.linear(p.row(i), order) for i in range(self.dim)]

        def recurse(terms, var):
            # terms: dict exponent-tuple (suffix from position var) -> coeff|series
            if var == self.dim:
                c = terms.get((), ZERO)
                return TruncSeries.const(c, new_dim, order)
            groups = {}
            for a, c in terms.items():
                groups.setdefault(a[0], {})[a[1:]] = c
            result = TruncSeries.zero(new_dim, order)
            if not groups:
                return result
            maxexp = max(groups)
            power = TruncSeries.const(1, new_dim, order if maxexp else None)
            for e in range(maxexp + 1):
                if e:
                    power = power * forms[var]
                sub = groups.get(e)
                if sub:
                    result = result + power * recurse(sub, var + 1)
            return result

        return recurse(dict(self.coeffs), 0)

    # -- output ---------------------------------------------------------------

    def pretty(self):
        """Monomials sorted by (total degree, exponents), exact coefficients."""
        if not self.coeffs:
            return "0"
        parts = []
        for a in sorted(self.coeffs, key=lambda t: (sum(t), t)):
            c = self.coeffs[a]
            vars_part = " ".join(
                "x%d" % (i + 1) if e == 1 else "x%d^%d" % (i + 1, e)
                for i, e in enumerate(a)
                if e
            )
            if vars_part:
                parts.append("%s * %s" % (qstr(c), vars_part))
            else:
                parts.append(qstr(c))
        return " + ".join(parts)

    def __repr__(self):
        return "TruncSeries(order=%s, %s)" % (self.order, self.pretty())


def series_exp_linear(s, order, dim=None):
    """Taylor series of xi -> e^{<xi,s>}: coefficient of xi^alpha is s^alpha/alpha!."""
    s = s if isinstance(s, QVector) else QVector(s)
    if dim is None:
        dim = s.dim
    lin = TruncSeries.linear(s, order)
    out = TruncSeries.const(1, dim, order)
    power = TruncSeries.const(1, dim, None)
    fact = 1
    for k in range(1, order + 1):
        power = power * lin
        fact *= k
        out = out + power.scale(rat(1, fact))
        if power.is_zero():
            break
    return out


def bernoulli_numbers(n):
    """B_0..B_n with the B_1 = -1/2 convention, via the defining recurrence."""
    b = [ONE]
    for m in range(1, n + 1):
        acc = ZERO
        c = 1  # binomial(m+1, j), updated incrementally
        for j in range(m):
            acc += c * b[j]
            c = c * (m + 1 - j) // (j + 1)
        b.append(-acc / (m + 1))
    return b


def series_f(order):
    """F(z) = z/(1 - e^z) = -sum B_n z^n/n!, in one variable; F(0) = -1."""
    b = bernoulli_numbers(order)
    fact = 1
    coeffs = {}
    for n, bn in enumerate(b):
        if n:
            fact *= n
        coeffs[(n,)] = -bn / fact
    return TruncSeries(1, coeffs, order)


def canonical_form(v):
    """(c, w): v = c*w with w primitive integer, first nonzero entry positive."""
    v = v if isinstance(v, QVector) else QVector(v)
    if v.is_zero():
        raise ValueError("zero linear form")
    d = denominator_lcm(v)
    ints = [int(e * d) for e in v]
    g = 0
    for e in ints:
        g = math.gcd(g, e)
    sign = 1
    for e in ints:
        if e:
            sign = 1 if e > 0 else -1
            break
    w = tuple(e * sign // g for e in ints)
    return rat(sign * g, d), w


class LinearForm:
    """The form xi -> <xi, v>."""

    __slots__ = ("v",)

    def __init__(self, v):
        v = v if isinstance(v, QVector) else QVector(v)
        if v.is_zero():
            raise ValueError("zero linear form")
        self.v = v

    def canonical(self):
        return canonical_form(self.v)

    def __repr__(self):
        return "LinearForm(%r)" % (self.v,)


def _form_vector(f):
    if isinstance(f, LinearForm):
        return f.v
    if isinstance(f, QVector):
        return f
    return QVector(f)


class MeroGerm:
    """num / prod(linear forms), tracked to a declared order.

    Denominator forms are canonicalized on construction (primitive integer
    vector, positive leading entry); the scalar parts fold into the numerator,
    so equal germs have identical denominator multisets.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=()):
        keys = []
        scale = ONE
        for f in den:
            if isinstance(f, tuple) and all(isinstance(e, int) for e in f):
                keys.append(f)
                continue
            c, w = canonical_form(_form_vector(f))
            scale = scale * c
            keys.append(w)
        if scale != 1:
            num = num.scale(ONE / scale)
        self.num = num
        self.den = tuple(sorted(keys))
        if any(len(w) != num.dim for w in self.den):
            raise ValueError("denominator form dimension mismatch")

    @property
    def dim(self):
        return self.num.dim

    @property
    def target_order(self):
        if self.num.order is None:
            return None
        return self.num.order - len(self.den)

    def is_analytic_form(self):
        return not self.den

    def scale(self, c):
        return MeroGerm(self.num.scale(c), self.den)

    def __repr__(self):
        return "MeroGerm(num=%r, den=%r)" % (self.num, self.den)


def germ_from_series(s):
    return MeroGerm(s, ())


def germ_zero(dim, order):
    return MeroGerm(TruncSeries.zero(dim, order), ())


def _den_counter(g):
    out = {}
    for w in g.den:
        out[w] = out.get(w, 0) + 1
    return out


def _series_of_form(w, dim):
    return TruncSeries.linear(QVector(w), None)


def germ_add(a, b):
    """Sum over the union (multiset-lcm) denominator."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    ca, cb = _den_counter(a), _den_counter(b)
    union = dict(ca)
    for w, m in cb.items():
        union[w] = max(union.get(w, 0), m)
    na, nb = a.num, b.num
    for w, m in union.items():
        for _ in range(m - ca.get(w, 0)):
            na = na * _series_of_form(w, a.dim)
        for _ in range(m - cb.get(w, 0)):
            nb = nb * _series_of_form(w, b.dim)
    den = []
    for w, m in union.items():
        den.extend([w] * m)
    num = na + nb
    if num.order is not None and num.order < 0:
        raise OrderUnderflow("germ sum lost all tracked coefficients")
    return MeroGerm(num, den)


def germ_sub(a, b):
    return germ_add(a, b.scale(-1))


def germ_mul(a, b):
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    num = a.num * b.num
    if num.order is not None and num.order < 0:
        raise OrderUnderflow("germ product lost all tracked coefficients")
    return MeroGerm(num, a.den + b.den)


def germ_scale(a, r):
    return a.scale(r)


def substitute_linear(g, p):
    """Substitute xi <- P xi in a germ: numerator by polynomial substitution,
    denominator forms transported by P^T; a form landing on 0 is rejected."""
    num = g.num.substitute_linear(p)
    pt = p.transpose()
    den = []
    for w in g.den:
        img = pt.matvec(QVector(w))
        if img.is_zero():
            raise ValueError("denominator form vanishes under substitution")
        den.append(img)
    return MeroGerm(num, den)


def _axis_divide(s, j, v_j):
    out = {}
    for a, c in s.coeffs.items():
        if a[j] == 0:
            raise NotDivisible(a)
        key = a[:j] + (a[j] - 1,) + a[j + 1 :]
        out[key] = c / v_j
    order = None if s.order is None else s.order - 1
    return TruncSeries(s.dim, out, order)


def divide_by_linear_form(s, form):
    """Exact division of a truncated series by a linear form.

    Axis forms divide directly.  General forms go through the invertible
    change of variables sending the form to the pivot coordinate (pivot =
    largest |coefficient|, ties to the smallest index), an axis division,
    and the inverse change.
    """
    v = _form_vector(form)
    if v.dim != s.dim:
        raise ValueError("dimension mismatch")
    support = [i for i, c in enumerate(v) if c != 0]
    if not support:
        raise ValueError("zero linear form")
    if len(support) == 1:
        j = support[0]
        return _axis_divide(s, j, v[j])
    j = max(range(v.dim), key=lambda i: (abs(v[i]), -i))
    m_rows = [[ONE if r == c else ZERO for c in range(v.dim)] for r in range(v.dim)]
    m_rows[j] = [-v[k] / v[j] for k in range(v.dim)]
    m_rows[j][j] = ONE / v[j]
    n_rows = [[ONE if r == c else ZERO for c in range(v.dim)] for r in range(v.dim)]
    n_rows[j] = list(v.coords)
    t = s.substitute_linear(QMatrix(m_rows))
    u = _axis_divide(t, j, ONE)
    return u.substitute_linear(QMatrix(n_rows))


def to_analytic(g):
    """Divide out every denominator form; NotDivisible means a genuine pole."""
    num = g.num
    for w in g.den:
        num = divide_by_linear_form(num, QVector(w))
    if num.order is not None and num.order < 0:
        raise OrderUnderflow("analytic part lost all tracked coefficients")
    return num


def residue_along(g, v, q=None):
    """Restriction to the hyperplane <xi,v> = 0 of <xi,v> * g(xi).

    The hyperplane is realized inside the ambient coordinates: the result is
    the germ composed with xi -> xi - (<xi,v>/Q(v,v)) Qv, which agrees with g
    on functionals vanishing on v and is constant along the Qv direction.
    """
    v = _form_vector(v)
    if q is None:
        q = ScalarProduct.standard(v.dim)
    c, w = canonical_form(v)
    mult = g.den.count(w)
    if mult == 0:
        order = g.num.order if g.num.order is None else g.num.order - len(g.den) + 1
        return MeroGerm(TruncSeries.zero(g.dim, order), ())
    if mult > 1:
        raise ValueError("residue along a higher-order pole")
    rest = list(g.den)
    rest.remove(w)
    qv = q.matrix.matvec(v)
    qvv = qv.dot(v)
    pi_rows = []
    for i in range(v.dim):
        row = [ONE if i == k else ZERO for k in range(v.dim)]
        for k in range(v.dim):
            row[k] -= qv[i] * v[k] / qvv
        pi_rows.append(row)
    pi = QMatrix(pi_rows)
    num = g.num.scale(c).substitute_linear(pi)
    pit = pi.transpose()
    den = []
    for wr in rest:
        img = pit.matvec(QVector(wr))
        if img.is_zero():
            raise ValueError("multiple denominator forms on the residue hyperplane")
        den.append(img)
    return MeroGerm(num, den)


def germ_eq(a, b, order=None):
    """Equality as germs: the difference's numerator vanishes through its
    tracked order (or through order + #den when an order is given)."""
    d = germ_sub(a, b)
    limit = d.num.order
    if order is not None:
        needed = order + len(d.den)
        if limit is not None and limit < needed:
            raise OrderUnderflow(
                "comparison through order %d needs numerators valid to %d, have %d"
                % (order, needed, limit)
            )
        limit = needed
    if limit is None:
        return d.num.is_zero()
    if limit < 0:
        raise OrderUnderflow("nothing left to compare")
    return all(c == 0 for t, c in d.num.coeffs.items() if sum(t) <= limit)
