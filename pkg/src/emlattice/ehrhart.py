"""Dilation behavior of lattice sums: counting and weighted counting of the
lattice points of t*p as a quasipolynomial in the integer dilation t.

Every face contributes a polynomial of degree at most dim(face) + deg(h)
whose coefficients only depend on t through its residue modulo the face
period, the least q making q times the face's affine span hit the lattice.
The contribution is recovered exactly by sampling single dilations on each
residue class and solving the resulting Vandermonde systems in rational
arithmetic; dilation zero is never used as a sample.  The global table is
assembled over the least common multiple of the face periods.
"""

import math
from concurrent.futures import ThreadPoolExecutor

from .exactlin import QMatrix, QVector, rat
from .mu import mu_cone
from .polycone import AffineCone, dilate_polytope, transverse_cone
from .euler_maclaurin import (
    FaceOperator,
    Polynomial,
    apply_operator,
    em_sum,
    integrate_over_face,
)


class QuasiPolynomial:
    """Integer-to-rational function given per residue class as polynomial
    coefficients in the dilation.  All residue rows share one length, so a
    row may carry trailing zeros."""

    __slots__ = ("period", "degree", "residues")

    def __init__(self, period, degree, residues):
        period = int(period)
        degree = int(degree)
        if period < 1:
            raise ValueError("period must be positive")
        if degree < 0:
            raise ValueError("negative degree")
        if set(residues) != set(range(period)):
            raise ValueError("residue rows must cover 0..period-1 exactly")
        table = {}
        for r, cs in residues.items():
            cs = [rat(c) for c in cs]
            if len(cs) != degree + 1:
                raise ValueError("residue row length must be degree+1")
            table[int(r)] = cs
        self.period = period
        self.degree = degree
        self.residues = table

    def evaluate(self, t):
        t = int(t)
        if t < 0:
            raise ValueError("negative dilation")
        cs = self.residues[t % self.period]
        acc = rat(0)
        for c in reversed(cs):
            acc = acc * t + c
        return acc

    def __repr__(self):
        return "QuasiPolynomial(period=%d, degree=%d)" % (
            self.period,
            self.degree,
        )


class FaceQuasiContribution:
    """One face's share of the dilation sum: for each residue r modulo the
    face period, the coefficients of a polynomial in t of degree
    dim(face) + deg(h), with everything below dim(face) equal to zero."""

    __slots__ = ("face", "period", "residues")

    def __init__(self, face, period, residues):
        self.face = face
        self.period = int(period)
        self.residues = {int(r): list(cs) for r, cs in residues.items()}

    def __repr__(self):
        return "FaceQuasiContribution(dim=%d, period=%d)" % (
            self.face.dim,
            self.period,
        )


def face_period(p, f):
    """Least q >= 1 such that q times the affine span of f contains a
    lattice point: the lcm of the denominators of the transverse cone's
    vertex in lattice coordinates of the quotient."""
    if f.owner is not p:
        raise ValueError("face does not belong to this polytope")
    tc = transverse_cone(p, f)
    c = tc.space.lattice.coords(tc.vertex)
    if c is None:
        raise AssertionError("transverse vertex left the quotient lattice span")
    q = 1
    for e in c:
        q = math.lcm(q, int(e.denominator))
    return q


def _dilated_cone(tc, t):
    if t == 0:
        vertex = QVector.zero(tc.space.ambient_dim)
    else:
        vertex = tc.vertex.scale(t)
    return AffineCone(tc.space, vertex, tc.rays, normalize=False)


def dilated_face_operator(p, f, t, order):
    """Operator of the face at dilation t: same transverse directions, the
    vertex scaled by t.  Dilation zero lands on the cone of directions."""
    if f.owner is not p:
        raise ValueError("face does not belong to this polytope")
    t = int(t)
    if t < 0:
        raise ValueError("negative dilation")
    tc = transverse_cone(p, f)
    series = mu_cone(_dilated_cone(tc, t), order).series
    return FaceOperator(f, series, order)


def _row_key(row):
    p = row.face.owner
    return (
        row.face.dim,
        tuple(sorted(p.vertices[i].coords for i in row.face.vertex_subset)),
    )


def ehrhart_quasipoly(p, h, jobs=None):
    """Quasipolynomial q with q(t) equal to the lattice sum of h over t*p
    for every integer t >= 1, plus the per-face contribution tables.

    Per face and residue class the sum's share is a genuine polynomial in
    t; its coefficients are fitted from dim(face)+deg(h)+1 consecutive
    dilations in the class and cross-checked by the vanishing of the
    coefficients below dim(face)."""
    n = p.space.ambient_dim
    if h.dim != n:
        raise ValueError("polynomial dimension does not match the polytope")
    m = h.degree()
    faces = list(p.faces)
    periods = [face_period(p, f) for f in faces]
    cones = [transverse_cone(p, f) for f in faces]

    samples = {}
    for fi, f in enumerate(faces):
        q = periods[fi]
        nf = f.dim + m
        for r in range(q):
            start = r if r > 0 else q
            samples[(fi, r)] = [start + q * j for j in range(nf + 1)]

    needed = sorted({t for ts in samples.values() for t in ts})
    dilates = {t: dilate_polytope(p, t) for t in needed}

    def face_value(fi, t):
        series = mu_cone(_dilated_cone(cones[fi], t), m).series
        op = FaceOperator(faces[fi], series, m)
        g = apply_operator(op, h)
        return integrate_over_face(dilates[t].faces[fi], g)

    def fit(key):
        fi, r = key
        ts = samples[key]
        vals = [face_value(fi, t) for t in ts]
        vm = QMatrix([[rat(t) ** j for j in range(len(ts))] for t in ts])
        cs = vm.solve(QVector(vals))
        if cs is None:
            raise AssertionError("degenerate dilation sample set")
        cs = list(cs.coords)
        for i in range(faces[fi].dim):
            if cs[i] != 0:
                raise AssertionError(
                    "dilation fit produced a coefficient below the face dimension"
                )
        return cs

    keys = sorted(samples)
    if jobs is not None and int(jobs) > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            fitted = dict(zip(keys, pool.map(fit, keys)))
    else:
        fitted = {key: fit(key) for key in keys}

    rows = []
    for fi, f in enumerate(faces):
        q = periods[fi]
        rows.append(
            FaceQuasiContribution(
                f, q, {r: fitted[(fi, r)] for r in range(q)}
            )
        )
    rows.sort(key=_row_key)

    period = math.lcm(*periods) if periods else 1
    degree = p.dim + m
    table = {}
    for big_r in range(period):
        cs = [rat(0)] * (degree + 1)
        for row in rows:
            for i, c in enumerate(row.residues[big_r % row.period]):
                cs[i] += c
        table[big_r] = cs
    return QuasiPolynomial(period, degree, table), rows


def count_dilate(p, t):
    """Number of lattice points of t*p.  Dilation zero counts the origin."""
    t = int(t)
    if t < 0:
        raise ValueError("negative dilation")
    if t == 0:
        return 1
    n = p.space.ambient_dim
    total = em_sum(dilate_polytope(p, t), Polynomial.constant(n, 1)).total
    if total.denominator != 1:
        raise AssertionError("lattice point count came out non-integral")
    return int(total)
