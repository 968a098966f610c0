"""Rational polyhedral geometry.

Polytopes with exact face lattices, affine cones, transverse cones,duals,
triangulations, box points, and the signed unimodular decomposition.  All
cones here are affine: a vertex plus a nonnegative span of primitive lattice
rays.
"""

from __future__ import annotations

import math
import os

from .exactlin import (
    Lattice,
    QMatrix,
    QVector,
    RationalSpace,
    ZERO,
    ONE,
    denominator_lcm,
    floor_frac,
    hermite_normal_form,
    integer_kernel,
    lll_reduce,
    orthogonal_projection,
    primitive_vector,
    quotient_lattice,
    rat,
    solve_integer,
)

HARD_DIM_LIMIT = 8


class DimensionCapError(Exception):
    """Ambient dimension beyond the configured cap."""


def max_ambient_dim():
    """Configured cap (env EMLATTICE_MAX_DIM), default 4, hard ceiling 8."""
    raw = os.environ.get("EMLATTICE_MAX_DIM")
    if raw is None:
        return 4
    try:
        v = int(raw)
    except ValueError:
        return 4
    return max(1, min(v, HARD_DIM_LIMIT))


def _check_dim(n):
    cap = max_ambient_dim()
    if n > cap:
        raise DimensionCapError("ambient dimension %d exceeds cap %d" % (n, cap))


def _primitive_direction(v):
    """Scale v by a positive rational to a primitive integer vector."""
    d = denominator_lcm(v)
    ints = [int(e * d) for e in v]
    g = 0
    for e in ints:
        g = math.gcd(g, e)
    if g == 0:
        raise ValueError("zero direction")
    return QVector([rat(e, g) for e in ints])


# ---------------------------------------------------------------------------
# double description


class _Ray:
    __slots__ = ("v", "tight")

    def __init__(self, v, tight):
        self.v = v
        self.tight = tight


def dual_cone(gens, ambient_dim):
    """Extreme rays of {xi : <xi, g> >= 0 for all g in gens}.

    Incremental double description with explicit lineality tracking;
    remaining lineality is returned as +/- ray pairs.  Rays come back
    primitive and lexicographically sorted.
    """
    gens = [g if isinstance(g, QVector) else QVector(g) for g in gens]
    lineality = [QVector.unit(ambient_dim, i) for i in range(ambient_dim)]
    rays = []
    processed = []
    for h in gens:
        if h.is_zero():
            continue
        idx = len(processed)
        lin_vals = [h.dot(l) for l in lineality]
        pivot = next((i for i, val in enumerate(lin_vals) if val != 0), None)
        if pivot is not None:
            l0 = lineality.pop(pivot)
            c0 = lin_vals.pop(pivot)
            if c0 < 0:
                l0, c0 = -l0, -c0
            lineality = [l - l0.scale(h.dot(l) / c0) for l in lineality]
            for r in rays:
                val = h.dot(r.v)
                if val != 0:
                    r.v = _primitive_direction(r.v - l0.scale(val / c0))
                r.tight.add(idx)
            rays.append(_Ray(_primitive_direction(l0), set(range(idx))))
            processed.append(h)
            continue
        plus, zero, minus = [], [], []
        for r in rays:
            val = h.dot(r.v)
            if val > 0:
                plus.append((r, val))
            elif val < 0:
                minus.append((r, val))
            else:
                zero.append(r)
        if not minus:
            for r in zero:
                r.tight.add(idx)
            rays = [r for r, _ in plus] + zero
            processed.append(h)
            continue
        rho = ambient_dim - len(lineality)  # rank of processed constraints

        def adjacent(a, b):
            # extreme rays span a common 2-face iff their shared tight
            # constraints have rank exactly rho - 2
            need = rho - 2
            if need <= 0:
                return True
            t = a.tight & b.tight
            if len(t) < need:
                return False
            m = QMatrix([list(processed[j].coords) for j in sorted(t)])
            return m.rank() == need

        new = []
        for p, pv in plus:
            for m, mv in minus:
                if adjacent(p, m):
                    w = _primitive_direction(m.v.scale(pv) - p.v.scale(mv))
                    tight = {j for j in range(idx) if processed[j].dot(w) == 0}
                    tight.add(idx)
                    new.append(_Ray(w, tight))
        for r in zero:
            r.tight.add(idx)
        rays = [r for r, _ in plus] + zero + new
        seen = {}
        for r in rays:
            if r.v.coords not in seen:
                seen[r.v.coords] = r
        rays = list(seen.values())
        processed.append(h)
    out = [r.v for r in rays]
    for l in lineality:
        p = _primitive_direction(l)
        out.append(p)
        out.append(-p)
    uniq = sorted({v.coords for v in out})
    return [QVector(c) for c in uniq]


def extreme_rays(gens):
    """The inclusion-minimal generator subset of a pointed cone.

    Proportional duplicates collapse first; a generator is extreme when the
    constraints tight at it pin down a single line within span(gens).
    """
    gens = [g if isinstance(g, QVector) else QVector(g) for g in gens]
    gens = [g for g in gens if not g.is_zero()]
    seen = {}
    for g in gens:
        seen.setdefault(_primitive_direction(g).coords, g)
    prim = [QVector(c) for c in sorted(seen)]
    if len(prim) <= 1:
        return prim
    n = prim[0].dim
    duals = dual_cone(prim, n)
    span = QMatrix.from_cols(prim, nrows=n)
    out = []
    for g in prim:
        rows = [list(h.coords) for h in duals if h.dot(g) == 0]
        rows.extend(list(nv.coords) for nv in span.transpose().nullspace())
        nullity = len(QMatrix(rows).nullspace()) if rows else n
        if nullity == 1:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# affine cones


class AffineCone:
    """vertex + nonnegative span of primitive lattice rays."""

    __slots__ = ("space", "vertex", "rays", "_dual")

    def __init__(self, space, vertex, rays, normalize=True):
        vertex = vertex if isinstance(vertex, QVector) else QVector(vertex)
        rays = [r if isinstance(r, QVector) else QVector(r) for r in rays]
        if normalize:
            rays = [primitive_vector(r, space.lattice) for r in rays]
            rays = [QVector(c) for c in sorted({r.coords for r in rays})]
        for r in rays:
            if not space.contains(r):
                raise ValueError("ray outside the space's span")
        self.space = space
        self.vertex = vertex
        self.rays = tuple(rays)
        self._dual = None

    @property
    def dim(self):
        if not self.rays:
            return 0
        return QMatrix.from_cols(self.rays).rank()

    @property
    def is_simplicial(self):
        return self.dim == len(self.rays)

    def dual_rays(self):
        if self._dual is None:
            self._dual = dual_cone(self.rays, self.space.ambient_dim)
        return self._dual

    @property
    def contains_line(self):
        for r in self.rays:
            if all(h.dot(r) == 0 for h in self.dual_rays()):
                return True
        return False

    @property
    def is_pointed(self):
        return not self.contains_line

    def direction_contains(self, y):
        """y in the recession cone?"""
        if self.is_simplicial:
            if not self.rays:
                return y.is_zero()
            c = QMatrix.from_cols(self.rays, nrows=self.space.ambient_dim).solve(y)
            return c is not None and all(e >= 0 for e in c)
        if self.rays and QMatrix.from_cols(self.rays).solve(y) is None:
            return False
        if not self.rays:
            return y.is_zero()
        return all(h.dot(y) >= 0 for h in self.dual_rays())

    def contains(self, x):
        return self.direction_contains(x - self.vertex)

    def translate(self, s):
        return AffineCone(self.space, self.vertex + s, self.rays, normalize=False)

    def key(self):
        return (self.space.fingerprint(), self.vertex.coords, tuple(r.coords for r in self.rays))

    def __eq__(self, other):
        return isinstance(other, AffineCone) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "AffineCone(vertex=%r, rays=%r)" % (self.vertex, list(self.rays))


def span_lattice_basis(space, vectors):
    """Ambient basis of lattice `intersect` span(vectors), saturated."""
    if not vectors:
        return []
    lat = space.lattice
    span = QMatrix.from_cols(vectors, nrows=space.ambient_dim)
    conds = span.transpose().nullspace()
    if not conds:
        return list(lat.basis)
    rows = []
    bm = lat.basis_matrix()
    for nv in conds:
        rows.append([nv.dot(bm.col(j)) for j in range(bm.ncols)])
    kern = integer_kernel(QMatrix(rows))
    return [lat.from_coords(c) for c in kern]


def cone_index(a):
    """Index of a simplicial cone: covolume of its ray parallelepiped in the
    saturated span lattice."""
    if not a.is_simplicial:
        raise ValueError("index of a non-simplicial cone")
    if not a.rays:
        return 1
    basis = span_lattice_basis(a.space, list(a.rays))
    w = QMatrix.from_cols(basis, nrows=a.space.ambient_dim)
    coords = [w.solve(r) for r in a.rays]
    m = QMatrix.from_cols(coords, nrows=len(basis))
    return abs(int(m.det()))


def faces_of_cone(a):
    """All faces as frozensets of ray indices (vertex = empty set), with the
    cone itself included; sorted by (rank, indices)."""
    n = len(a.rays)
    full = frozenset(range(n))
    if not n:
        return [full]
    duals = a.dual_rays()
    tight = []
    for j, h in enumerate(duals):
        tight.append(frozenset(i for i in range(n) if h.dot(a.rays[i]) == 0))
    found = {full}
    queue = [full]
    while queue:
        s = queue.pop()
        for t in tight:
            c = s & t
            if c not in found:
                found.add(c)
                queue.append(c)
    def rank_of(s):
        if not s:
            return 0
        return QMatrix.from_cols([a.rays[i] for i in sorted(s)]).rank()
    return sorted(found, key=lambda s: (rank_of(s), sorted(s)))


def subcone(a, ray_indices):
    return AffineCone(a.space, a.vertex, [a.rays[i] for i in sorted(ray_indices)], normalize=False)


def triangulate_cone(a):
    """Fan triangulation using only edges of the cone: cone the lex-least ray
    over the recursively triangulated facets that miss it."""
    if not a.is_pointed:
        raise ValueError("triangulation needs a pointed cone")
    if a.is_simplicial:
        return [a]
    d = a.dim
    r0 = 0  # rays are stored lex-sorted
    faces = faces_of_cone(a)
    facets = [s for s in faces if s and s != frozenset(range(len(a.rays)))
              and QMatrix.from_cols([a.rays[i] for i in sorted(s)],
                                    nrows=a.space.ambient_dim).rank() == d - 1]
    out = []
    for s in facets:
        if r0 in s:
            continue
        for piece in triangulate_cone(subcone(a, s)):
            out.append(AffineCone(a.space, a.vertex, list(piece.rays) + [a.rays[r0]]))
    return out


def box_points(s, gens, lat, halfopen_mask=frozenset()):
    """Lattice points of s + sum_i I_i g_i with I_i = [0,1) or (0,1] for
    indices in halfopen_mask.  Exactly index-many points come back."""
    s = s if isinstance(s, QVector) else QVector(s)
    gens = [g if isinstance(g, QVector) else QVector(g) for g in gens]
    if not gens:
        return [s] if lat.contains(s) else []
    gm = QMatrix.from_cols([lat.coords(g) for g in gens], nrows=lat.rank)
    if not gm.is_integer():
        raise ValueError("box generators must be lattice vectors")
    if gm.rank() != len(gens):
        raise ValueError("dependent box generators")
    sigma = lat.coords(s)
    if sigma is None:
        return []
    r, k = gm.nrows, gm.ncols
    if k < r:
        # restrict to the saturated sublattice spanned by the generators
        conds = QMatrix([list(nv.coords) for nv in gm.transpose().nullspace()])
        kern = integer_kernel(conds)
        kmat = QMatrix.from_cols(kern, nrows=r)
        y0 = solve_integer(conds, conds.matvec(sigma))
        if y0 is None:
            return []
        sigma2 = kmat.solve(sigma - y0)
        g2 = QMatrix.from_cols([kmat.solve(gm.col(j)) for j in range(k)], nrows=k)
        inner = _box_points_fulldim(sigma2, g2, halfopen_mask)
        out = []
        for y in inner:
            out.append(lat.from_coords(y0 + kmat.matvec(y)))
        return out
    pts = _box_points_fulldim(sigma, gm, halfopen_mask)
    return [lat.from_coords(y) for y in pts]


def _box_points_fulldim(sigma, g, halfopen_mask):
    """Integer points in sigma + G*box, G square nonsingular integer."""
    r = g.nrows
    h, _ = hermite_normal_form(g)
    ginv = g.inverse()
    out = []
    ranges = [range(int(h.rows[i][i])) for i in range(r)]

    def rec(i, resid):
        if i == r:
            t0 = ginv.matvec(QVector(resid) - sigma)
            t = []
            for j, val in enumerate(t0):
                fr = floor_frac(val)
                if j in halfopen_mask and fr == 0:
                    fr = ONE
                t.append(fr)
            out.append(sigma + g.matvec(QVector(t)))
            return
        for v in ranges[i]:
            rec(i + 1, resid + [v])

    rec(0, [])
    return out


# ---------------------------------------------------------------------------
# Barvinok signed decomposition


def _short_vector(minv, max_combo=8):
    """Nonzero alpha in the column lattice of minv minimizing max|coordinate|,
    required < 1; LLL basis plus progressively larger integer combinations,
    deterministic tie-break."""
    k = minv.nrows
    lat = Lattice(k, minv.cols())
    red = lll_reduce(lat)
    basis = list(red.basis)

    def sup(v):
        return max(abs(c) for c in v)

    best = None
    for c in range(1, max_combo + 1):
        combos = [[ ]]
        for _ in range(k):
            combos = [cc + [j] for cc in combos for j in range(-c, c + 1)]
        for cc in combos:
            if all(x == 0 for x in cc):
                continue
            v = QVector.zero(k)
            for x, b in zip(cc, basis, strict=True):
                if x:
                    v = v + b.scale(x)
            if v.is_zero():
                continue
            m = sup(v)
            if m >= 1:
                continue
            cand = (m, v.coords)
            if best is None or cand < best:
                best = cand
        if best is not None:
            return QVector(best[1])
    raise AssertionError("no short vector with sup-norm < 1 found")


def barvinok_decompose(a):
    """Signed unimodular decomposition of a simplicial pointed affine cone.

    Runs on the polarized side so that discarded lower-dimensional pieces
    polarize back to cones with lines (which vanish for S and mu); every
    returned cone is unimodular with the same vertex.
    """
    if not a.is_simplicial:
        raise ValueError("decomposition needs a simplicial cone")
    if not a.rays:
        return [(1, a)]
    basis = span_lattice_basis(a.space, list(a.rays))
    w = QMatrix.from_cols(basis, nrows=a.space.ambient_dim)
    rcols = [w.solve(r) for r in a.rays]
    rmat = QMatrix.from_cols(rcols, nrows=len(basis))
    if not rmat.is_integer():
        raise AssertionError("primitive rays must be integral in the span lattice")
    det = rmat.det()
    if abs(det) == 1:
        return [(1, a)]

    def polar(m):
        inv_t = m.inverse().transpose()
        cols = [_primitive_direction(inv_t.col(j)) for j in range(m.ncols)]
        return QMatrix.from_cols(cols, nrows=m.nrows)

    stack = [(1, polar(rmat))]
    leaves = []
    while stack:
        eps, m = stack.pop()
        d = m.det()
        if abs(d) == 1:
            leaves.append((eps, m))
            continue
        alpha = _short_vector(m.inverse())
        if all(c <= 0 for c in alpha):
            # the signed replacement identity needs some positive coefficient
            # (with all-negative ones a whole-space term would be dropped)
            alpha = -alpha
        wvec = m.matvec(alpha)
        if not all(c.denominator == 1 for c in wvec):
            raise AssertionError("short vector must map to an integer point")
        for i, ai in enumerate(alpha):
            if ai == 0:
                continue
            cols = [m.col(j) if j != i else wvec for j in range(m.ncols)]
            sign = 1 if ai > 0 else -1
            stack.append((eps * sign, QMatrix.from_cols(cols, nrows=m.nrows)))
    out = []
    for eps, m in leaves:
        back = polar(m)
        rays = [w.matvec(back.col(j)) for j in range(back.ncols)]
        out.append((eps, AffineCone(a.space, a.vertex, rays)))
    return out


# ---------------------------------------------------------------------------
# polytopes


class FaceHandle:
    """One face of a polytope: its vertex subset plus affine data."""

    __slots__ = ("owner", "dim", "vertex_subset", "affine_basis", "span_point")

    def __init__(self, owner, dim, vertex_subset, affine_basis, span_point):
        self.owner = owner
        self.dim = dim
        self.vertex_subset = frozenset(vertex_subset)
        self.affine_basis = affine_basis
        self.span_point = span_point

    @property
    def vertices(self):
        return tuple(self.owner.vertices[i] for i in sorted(self.vertex_subset))

    def sort_key(self):
        return (self.dim, tuple(sorted(self.vertex_subset)))

    def __repr__(self):
        return "FaceHandle(dim=%d, vertices=%s)" % (self.dim, sorted(self.vertex_subset))


class Polytope:
    __slots__ = ("space", "vertices", "hrep", "equations", "faces", "dim", "_face_map")

    def __init__(self, space, vertices, hrep, equations, faces_data, dim):
        self.space = space
        self.vertices = tuple(vertices)
        self.hrep = tuple(hrep)
        self.equations = tuple(equations)
        self.dim = dim
        faces = []
        for fdim, subset, basis, point in faces_data:
            faces.append(FaceHandle(self, fdim, subset, basis, point))
        faces.sort(key=lambda f: f.sort_key())
        self.faces = tuple(faces)
        self._face_map = {f.vertex_subset: f for f in self.faces}

    def face_by_vertices(self, subset):
        return self._face_map[frozenset(subset)]

    @property
    def top_face(self):
        return self.face_by_vertices(range(len(self.vertices)))

    def faces_of_dim(self, d):
        return [f for f in self.faces if f.dim == d]

    def contains(self, x):
        for a, b in self.hrep:
            if a.dot(x) + b < 0:
                return False
        for a, b in self.equations:
            if a.dot(x) + b != 0:
                return False
        return True

    def __repr__(self):
        return "Polytope(dim=%d, vertices=%d, faces=%d)" % (self.dim, len(self.vertices), len(self.faces))


def build_polytope(space, points):
    """Exact convex hull with the full face lattice.

    Extreme points are found by the facet-rank test after a double
    description pass on the homogenization; lower-dimensional hulls are
    handled in affine-hull coordinates and mapped back.
    """
    if not points:
        raise ValueError("empty point list")
    _check_dim(space.ambient_dim)
    pts = []
    seen = set()
    for p in points:
        p = p if isinstance(p, QVector) else QVector(p)
        if p.dim != space.ambient_dim:
            raise ValueError("point dimension mismatch")
        if p.coords not in seen:
            seen.add(p.coords)
            pts.append(p)
    pts.sort(key=lambda v: v.coords)
    n = space.ambient_dim
    v0 = pts[0]
    diffs = [p - v0 for p in pts[1:]]
    hull = QMatrix.from_cols(diffs, nrows=n) if diffs else QMatrix.from_cols([], nrows=n)
    d = hull.rank() if diffs else 0

    # equations cutting out the affine hull
    equations = []
    if d < n:
        rows = hull.transpose().nullspace() if diffs else [QVector.unit(n, i) for i in range(n)]
        for nv in rows:
            equations.append((nv, -nv.dot(v0)))

    if d == 0:
        faces_data = [(0, frozenset([0]), QMatrix.from_cols([], nrows=n), pts[0])]
        return Polytope(space, pts, [], equations, faces_data, 0)

    # basis of the affine hull: independent difference columns
    basis_cols = []
    for c in diffs:
        trial = basis_cols + [c]
        if QMatrix.from_cols(trial, nrows=n).rank() == len(trial):
            basis_cols.append(c)
        if len(basis_cols) == d:
            break
    b = QMatrix.from_cols(basis_cols, nrows=n)
    coords = [b.solve(p - v0) for p in pts]

    # facets of the hull-coordinate polytope via the homogenization cone
    homog = [QVector(list(c.coords) + [1]) for c in coords]
    facet_rays = dual_cone(homog, d + 1)
    facets = []
    for fr in facet_rays:
        a = QVector(fr.coords[:d])
        if a.is_zero():
            continue  # the inequality 1 >= 0 carries no facet
        facets.append((a, fr.coords[d]))

    vert_tight = []
    for c in coords:
        vert_tight.append(frozenset(j for j, (a, off) in enumerate(facets) if a.dot(c) + off == 0))
    extreme_idx = []
    for i, c in enumerate(coords):
        rows = [list(facets[j][0].coords) for j in sorted(vert_tight[i])]
        if rows and QMatrix(rows).rank() == d:
            extreme_idx.append(i)
    vpts = [pts[i] for i in extreme_idx]
    vcoords = [coords[i] for i in extreme_idx]
    vtight = [vert_tight[i] for i in extreme_idx]
    m = len(vpts)

    # face lattice: closures of facet-subset intersections on vertex sets
    full = frozenset(range(m))
    found = {full}
    queue = [full]
    while queue:
        s = queue.pop()
        for j in range(len(facets)):
            c = frozenset(i for i in s if j in vtight[i])
            if c and c not in found:
                found.add(c)
                queue.append(c)

    faces_data = []
    for s in found:
        idxs = sorted(s)
        first = vpts[idxs[0]]
        cols = []
        for i in idxs[1:]:
            trial = cols + [vpts[i] - first]
            if QMatrix.from_cols(trial, nrows=n).rank() == len(trial):
                cols.append(vpts[i] - first)
        fdim = len(cols)
        faces_data.append((fdim, s, QMatrix.from_cols(cols, nrows=n), first))

    # ambient H-representation: transport facet normals through the hull basis
    hrep = []
    gram_inv = b.transpose().matmat(b).inverse()
    for a, off in facets:
        na = b.matmat(gram_inv).matvec(a)
        hrep.append((na, off - na.dot(v0)))

    return Polytope(space, vpts, hrep, equations, faces_data, d)


def dilate_polytope(p, t):
    """t*p for rational t >= 0, reusing the face combinatorics."""
    t = rat(t)
    if t < 0:
        raise ValueError("negative dilation")
    if t == 0:
        zero = QVector.zero(p.space.ambient_dim)
        return build_polytope(p.space, [zero])
    vertices = [v.scale(t) for v in p.vertices]
    hrep = [(a, t * off) for a, off in p.hrep]
    equations = [(a, t * off) for a, off in p.equations]
    faces_data = []
    for f in p.faces:
        faces_data.append((f.dim, f.vertex_subset, f.affine_basis, f.span_point.scale(t)))
    return Polytope(p.space, vertices, hrep, equations, faces_data, p.dim)


def tangent_cone(p, v):
    """Supporting cone of p at a vertex: vertex v, primitive edge rays."""
    v = v if isinstance(v, QVector) else QVector(v)
    try:
        vi = p.vertices.index(v)
    except ValueError:
        raise ValueError("not a vertex of the polytope")
    rays = []
    for e in p.faces_of_dim(1):
        if vi in e.vertex_subset:
            (other,) = [i for i in e.vertex_subset if i != vi]
            rays.append(primitive_vector(p.vertices[other] - v, p.space.lattice))
    return AffineCone(p.space, v, rays)


def _barycenter(points):
    acc = QVector.zero(points[0].dim)
    for x in points:
        acc = acc + x
    return acc.scale(rat(1, len(points)))


def transverse_cone(p, f):
    """Projection of the supporting cone along f to the quotient by lin(f),
    realized orthogonally inside the ambient coordinates."""
    if f.owner is not p:
        raise ValueError("face does not belong to this polytope")
    vi_sorted = sorted(f.vertex_subset)
    if f.dim == 0 and len(p.vertices) > 1:
        tc = tangent_cone(p, p.vertices[vi_sorted[0]])
        qspace = quotient_lattice(p.space, QMatrix.from_cols([], nrows=p.space.ambient_dim))
        return AffineCone(qspace, tc.vertex, tc.rays, normalize=False)
    qspace = quotient_lattice(p.space, f.affine_basis)
    proj = orthogonal_projection(p.space, f.affine_basis)
    x = _barycenter([p.vertices[i] for i in vi_sorted])
    vertex = proj.matvec(x)
    covering = [
        g
        for g in p.faces
        if g.dim == f.dim + 1 and f.vertex_subset < g.vertex_subset
    ]
    rays = []
    for g in covering:
        y = _barycenter([p.vertices[i] for i in sorted(g.vertex_subset)])
        img = proj.matvec(y - x)
        if img.is_zero():
            raise AssertionError("covering face collapsed under projection")
        rays.append(primitive_vector(img, qspace.lattice))
    return AffineCone(qspace, vertex, rays)


def cone_transverse_cone(a, ray_subset):
    """t(a, f) for a face f of an affine cone: just the projection of a
    modulo lin(f)."""
    fr = [a.rays[i] for i in sorted(ray_subset)]
    lb = QMatrix.from_cols(fr, nrows=a.space.ambient_dim)
    qspace = quotient_lattice(a.space, lb)
    proj = orthogonal_projection(a.space, lb)
    vertex = proj.matvec(a.vertex)
    imgs = []
    for r in a.rays:
        img = proj.matvec(r)
        if not img.is_zero():
            imgs.append(img)
    if not imgs:
        return AffineCone(qspace, vertex, [])
    ext = extreme_rays(imgs)
    rays = [primitive_vector(r, qspace.lattice) for r in ext]
    return AffineCone(qspace, vertex, rays)


# ---------------------------------------------------------------------------
# JSON schema shared with the CLI


def polytope_to_json(p):
    from .exactlin import qstr

    return {
        "dim": p.space.ambient_dim,
        "vertices": [[qstr(c) for c in v] for v in p.vertices],
    }


def polytope_from_json(obj, q=None):
    from .exactlin import ScalarProduct

    dim = int(obj["dim"])
    _check_dim(dim)
    sp = RationalSpace.standard(dim, q if q is not None else ScalarProduct.standard(dim))
    pts = [QVector([rat(str(c)) for c in row]) for row in obj["vertices"]]
    if any(p.dim != dim for p in pts):
        raise ValueError("vertex length does not match dim")
    return build_polytope(sp, pts)


def cone_from_json(obj, q=None):
    from .exactlin import ScalarProduct

    vertex = QVector([rat(str(c)) for c in obj["vertex"]])
    dim = vertex.dim
    _check_dim(dim)
    sp = RationalSpace.standard(dim, q if q is not None else ScalarProduct.standard(dim))
    rays = [QVector([rat(str(c)) for c in row]) for row in obj["rays"]]
    return AffineCone(sp, vertex, rays)


def scalar_product_from_json(rows, dim):
    from .exactlin import ScalarProduct

    m = QMatrix([[rat(str(c)) for c in row] for row in rows])
    if m.nrows != dim:
        raise ValueError("Q matrix dimension mismatch")
    return ScalarProduct(m)
