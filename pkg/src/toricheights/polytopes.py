"""Exact rational convex bodies: polytopes, balls, membership oracles.

Polytopes are stored by their extreme points (V-representation), normalized
and lexicographically sorted so that equality is plain tuple comparison.
Facet data (H-representation) is computed on demand, always inside the
affine hull, so lower-dimensional polytopes (segments in the plane, etc.)
are first-class citizens.  Exact hull and triangulation are limited to
intrinsic dimension <= 3; everything is Fraction arithmetic.
"""

import itertools
from fractions import Fraction

from . import lp
from .qlinalg import (
    ONE,
    ZERO,
    dot,
    is_zero,
    nullspace,
    primitive,
    qvec,
    rank,
    solve,
    solve_affine,
    sqrt_upper,
    vadd,
    vscale,
    vsub,
)


class DimensionTooHigh(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class ConvexBody:
    """Base class; concrete bodies implement membership and a bounding box."""

    def contains(self, point):
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def inner_point(self):
        raise NotImplementedError

    @property
    def is_empty(self):
        return False


class EmptyBody(ConvexBody):
    def __init__(self, dim):
        self.dim = dim

    def contains(self, point):
        return False

    def bounding_box(self):
        return None

    def inner_point(self):
        return None

    @property
    def is_empty(self):
        return True

    def __eq__(self, other):
        return isinstance(other, EmptyBody) and other.dim == self.dim

    def __repr__(self):
        return f"EmptyBody(dim={self.dim})"


def _dedupe(points):
    seen = []
    for p in points:
        if p not in seen:
            seen.append(p)
    return seen


def _in_convex_hull(p, others):
    """Exact membership p in conv(others) via a small feasibility LP."""
    n = len(others)
    if n == 0:
        return False
    A_eq = [[ONE] * n] + [[q[c] for q in others] for c in range(len(p))]
    b_eq = [ONE] + list(p)
    return lp.feasible_nonneg(A_eq, b_eq)


def extreme_points(points):
    """Filter a point list down to the extreme points of its convex hull.

    Floats only propose separating directions; every keep is certified by an
    exact strict-separation check, every drop by an exact membership LP, so
    the result is the exact vertex set.
    """
    pts = _dedupe([qvec(p) for p in points])
    if len(pts) <= 2:
        return pts
    import numpy as np

    arr = np.array([[float(x) for x in p] for p in pts])
    centroid = arr.mean(axis=0)
    certified = []
    undecided = []
    rng = np.random.default_rng(1 + len(pts))
    for i, p in enumerate(pts):
        found = False
        for trial in range(3):
            d = arr[i] - centroid
            if trial > 0:
                d = d + 0.1 * rng.standard_normal(len(d))
            if not np.any(d):
                break
            dq = tuple(Fraction(float(x)).limit_denominator(2**20) for x in d)
            mine = dot(dq, p)
            if all(j == i or dot(dq, q) < mine for j, q in enumerate(pts)):
                found = True
                break
        (certified if found else undecided).append(p)
    out = list(certified)
    survivors = []
    for p in undecided:
        if not _in_convex_hull(p, out):
            survivors.append(p)
    # Rarely, a true vertex escapes float certification; decide exactly.
    for p in survivors:
        others = [q for q in pts if q != p]
        if not _in_convex_hull(p, others):
            out.append(p)
    return out


def affine_hull(points):
    """Return (origin, basis, k): points live in origin + span(basis), dim k."""
    origin = points[0]
    diffs = [vsub(p, origin) for p in points[1:]]
    basis = []
    for d in diffs:
        if rank(basis + [d]) > len(basis):
            basis.append(d)
    return origin, basis, len(basis)


def hull_coords(origin, basis, point):
    """Coordinates of point in origin + span(basis); None if off the hull."""
    if not basis:
        return () if point == origin else None
    A = [[basis[j][i] for j in range(len(basis))] for i in range(len(origin))]
    b = list(vsub(point, origin))
    res = solve_affine(A, b)
    if res is None:
        return None
    x, ns = res
    if ns:  # basis is independent, so this cannot happen
        return None
    return tuple(x)


def from_hull_coords(origin, basis, s):
    p = origin
    for c, bvec in zip(s, basis):
        p = vadd(p, vscale(c, bvec))
    return p


def _facets_from_vertices(verts, k):
    """Facets (a, b) with a.s <= b of a k-dimensional hull, k <= 3."""
    if k == 0:
        return []
    if k > 3:
        raise DimensionTooHigh(f"exact facet enumeration limited to dim <= 3, got {k}")
    facets = {}
    for sub in itertools.combinations(verts, k):
        diffs = [vsub(p, sub[0]) for p in sub[1:]]
        if rank(diffs) != k - 1:
            continue
        ns = nullspace(diffs) if diffs else [(ONE,)]
        if len(ns) != 1:
            continue
        a = ns[0]
        b = dot(a, sub[0])
        lo = all(dot(a, v) <= b for v in verts)
        hi = all(dot(a, v) >= b for v in verts)
        if lo == hi:
            continue
        if hi:
            a, b = tuple(-x for x in a), -b
        ap = primitive(a)
        scale = next(Fraction(pi, ai) for pi, ai in zip(ap, a) if ai != 0)
        facets[(ap, b * scale)] = None
    return list(facets)


def enumerate_vertices(ineqs, eqs, dim):
    """Vertices of {x : ineqs, eqs}; brute force over active sets, dim <= 3.

    A float pre-pass discards active sets whose candidate point is clearly
    infeasible; surviving candidates are recomputed and checked exactly.
    """
    if dim > 3:
        raise DimensionTooHigh(f"vertex enumeration limited to dim <= 3, got {dim}")
    import numpy as np

    eq_rows = [list(a) for a, _ in eqs]
    need = dim - rank(eq_rows) if eq_rows else dim
    if need == 0:
        x = solve(eq_rows, [bb for _, bb in eqs])
        if x is not None and all(dot(a, x) <= bb for a, bb in ineqs):
            return [x]
        return []
    Af = np.array([[float(x) for x in a] for a, _ in ineqs]) if ineqs else np.zeros((0, dim))
    bf = np.array([float(bb) for _, bb in ineqs])
    Ef = np.array([[float(x) for x in a] for a in eq_rows]) if eq_rows else np.zeros((0, dim))
    ef = np.array([float(bb) for _, bb in eqs])
    scale = max(1.0, float(np.abs(bf).max()) if len(bf) else 1.0)
    verts = []
    for sub in itertools.combinations(range(len(ineqs)), need):
        mat = np.vstack([Ef, Af[list(sub)]]) if eq_rows else Af[list(sub)]
        rhs = np.concatenate([ef, bf[list(sub)]]) if eq_rows else bf[list(sub)]
        clear = False
        try:
            xf = np.linalg.solve(mat, rhs)
            if len(bf) and (Af @ xf - bf).max() > 1e-7 * scale:
                clear = True
        except np.linalg.LinAlgError:
            pass
        if clear:
            continue
        A = eq_rows + [list(ineqs[i][0]) for i in sub]
        b = [bb for _, bb in eqs] + [ineqs[i][1] for i in sub]
        x = solve(A, b)
        if x is None:
            continue
        if all(dot(a, x) <= bb for a, bb in ineqs) and x not in verts:
            verts.append(x)
    return verts


def enumerate_rays(ineqs, eqs, dim):
    """Extreme rays of the recession cone {x : Ax <= 0, Ex = 0} (pointed case)."""
    eq_rows = [list(a) for a, _ in eqs]
    free = dim - (rank(eq_rows) if eq_rows else 0)
    if free <= 0:
        return []
    rows = [list(a) for a, _ in ineqs]
    rays = []

    def feasible_dir(r):
        return all(dot(a, r) <= 0 for a, _ in ineqs) and all(dot(a, r) == 0 for a in eq_rows)

    if free == 1:
        candidates = nullspace(eq_rows) if eq_rows else nullspace([[ZERO] * dim])
        for base in candidates:
            for r in (base, tuple(-x for x in base)):
                if not is_zero(r) and feasible_dir(r):
                    rp = primitive(r)
                    if rp not in rays:
                        rays.append(rp)
        return rays
    for sub in itertools.combinations(range(len(rows)), free - 1):
        A = eq_rows + [rows[i] for i in sub]
        ns = nullspace(A)
        if len(ns) != 1:
            continue
        for r in (ns[0], tuple(-x for x in ns[0])):
            if feasible_dir(r):
                rp = primitive(r)
                if rp not in rays:
                    rays.append(rp)
    return rays


class Polytope(ConvexBody):
    """Compact rational polytope given by its extreme points."""

    def __init__(self, dim, vertices, _trusted=False):
        self.dim = dim
        vs = [qvec(v) for v in vertices]
        for v in vs:
            if len(v) != dim:
                raise DimensionMismatch(f"vertex of length {len(v)} in dim {dim}")
        if not _trusted:
            vs = extreme_points(vs)
        self.vertices = tuple(sorted(vs))
        if not self.vertices:
            raise ValueError("empty vertex list; use EmptyBody")
        self._geom = None

    @classmethod
    def from_points(cls, points, dim=None):
        pts = [qvec(p) for p in points]
        if dim is None:
            dim = len(pts[0])
        return cls(dim, extreme_points(pts), _trusted=True)

    @classmethod
    def interval(cls, a, b):
        return cls(1, [(Fraction(a),), (Fraction(b),)])

    @classmethod
    def box(cls, lo, hi):
        lo, hi = qvec(lo), qvec(hi)
        return cls.from_points(list(itertools.product(*[(l, h) for l, h in zip(lo, hi)])))

    def __eq__(self, other):
        return (
            isinstance(other, Polytope)
            and other.dim == self.dim
            and other.vertices == self.vertices
        )

    def __hash__(self):
        return hash((self.dim, self.vertices))

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={[tuple(map(str, v)) for v in self.vertices]})"

    # -- geometry ---------------------------------------------------------

    def _ensure_geom(self):
        if self._geom is None:
            origin, basis, k = affine_hull(list(self.vertices))
            verts_k = [hull_coords(origin, basis, v) for v in self.vertices]
            facets_k = _facets_from_vertices(verts_k, k)
            self._geom = (origin, basis, k, verts_k, facets_k)
        return self._geom

    @property
    def intrinsic_dim(self):
        return self._ensure_geom()[2]

    def hull_frame(self):
        origin, basis, k, _, _ = self._ensure_geom()
        return origin, basis, k

    def facets_local(self):
        """Facet inequalities a.s <= b in affine-hull coordinates."""
        return self._ensure_geom()[4]

    def contains(self, point):
        point = qvec(point)
        try:
            origin, basis, k, _, facets = self._ensure_geom()
        except DimensionTooHigh:
            # no facet description above dim 3; decide membership by LP
            return _in_convex_hull(point, list(self.vertices))
        s = hull_coords(origin, basis, point)
        if s is None:
            return False
        return all(dot(a, s) <= b for a, b in facets)

    def contains_interior(self, point):
        """Relative-interior membership."""
        point = qvec(point)
        origin, basis, k, _, facets = self._ensure_geom()
        s = hull_coords(origin, basis, point)
        if s is None:
            return False
        return all(dot(a, s) < b for a, b in facets)

    def ambient_facets(self):
        """(ineqs, eqs) in ambient coordinates; ineqs as (a, b): a.y <= b."""
        origin, basis, k, _, facets = self._ensure_geom()
        if k == self.dim:
            # Ambient facet row a_amb solves a_amb . basis_j = a_j.
            ineqs = []
            for a, b in facets:
                sol = solve_affine([list(bv) for bv in basis], list(a))
                a_amb = sol[0]
                ineqs.append((a_amb, b + dot(a_amb, origin)))
            return ineqs, []
        eqs = []
        for nvec in nullspace([list(b) for b in basis]) if basis else nullspace([[ZERO] * self.dim]):
            eqs.append((nvec, dot(nvec, origin)))
        if not basis:
            eqs = []
            for i in range(self.dim):
                e = tuple(ONE if j == i else ZERO for j in range(self.dim))
                eqs.append((e, origin[i]))
        return [], eqs

    def bounding_box(self):
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.dim))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.dim))
        return lo, hi

    def contains_batch(self, pts):
        """Vectorized float membership (used by the qMC fallback)."""
        import numpy as np

        pts = np.asarray(pts, dtype=float)
        if self.dim <= 3:
            ineqs, eqs = self.ambient_facets()
            ok = np.ones(len(pts), dtype=bool)
            for a, b in ineqs:
                ok &= pts @ np.array([float(x) for x in a]) <= float(b) + 1e-12
            for a, b in eqs:
                ok &= np.abs(pts @ np.array([float(x) for x in a]) - float(b)) <= 1e-12
            return ok
        try:
            from scipy.spatial import Delaunay, QhullError

            if not hasattr(self, "_delaunay"):
                verts = np.array([[float(x) for x in v] for v in self.vertices])
                try:
                    self._delaunay = Delaunay(verts)
                except QhullError:
                    self._delaunay = None
            if self._delaunay is not None:
                return self._delaunay.find_simplex(pts) >= 0
        except ImportError:
            pass
        from fractions import Fraction

        return np.array(
            [self.contains([Fraction(x).limit_denominator(10**9) for x in p]) for p in pts]
        )

    def inner_point(self):
        n = len(self.vertices)
        acc = self.vertices[0]
        for v in self.vertices[1:]:
            acc = vadd(acc, v)
        return vscale(Fraction(1, n), acc)

    def translate(self, t):
        t = qvec(t)
        return Polytope(self.dim, [vadd(v, t) for v in self.vertices], _trusted=True)

    def scale(self, c):
        c = Fraction(c)
        if c < 0:
            raise ValueError("scale factor must be >= 0")
        if c == 0:
            return Polytope(self.dim, [tuple(ZERO for _ in range(self.dim))], _trusted=True)
        return Polytope(self.dim, [vscale(c, v) for v in self.vertices], _trusted=True)

    def volume(self):
        """Lebesgue volume in the ambient lattice normalization (0 if thin)."""
        origin, basis, k, verts_k, _ = self._ensure_geom()
        if k < self.dim:
            return ZERO
        from .qlinalg import det

        # Local coordinates distort the measure by |det(basis)|.
        scale = abs(det([list(b) for b in basis]))
        total = ZERO
        for simplex in self._triangulate_local():
            mat = [list(vsub(p, simplex[0])) for p in simplex[1:]]
            total += abs(det(mat))
        fact = 1
        for i in range(2, k + 1):
            fact *= i
        return total * scale / fact

    def _order_polygon(self, verts_2d):
        c = verts_2d[0]
        for v in verts_2d[1:]:
            c = vadd(c, v)
        c = vscale(Fraction(1, len(verts_2d)), c)

        def half(v):
            d = vsub(v, c)
            return 0 if (d[1], d[0]) > (ZERO, ZERO) else 1

        import functools

        def cmp(u, v):
            hu, hv = half(u), half(v)
            if hu != hv:
                return -1 if hu < hv else 1
            du, dv = vsub(u, c), vsub(v, c)
            cr = du[0] * dv[1] - du[1] * dv[0]
            if cr != 0:
                return -1 if cr > 0 else 1
            return 0

        return sorted(verts_2d, key=functools.cmp_to_key(cmp))

    def _triangulate_local(self):
        """Simplices (vertex tuples) in hull coordinates, intrinsic dim k <= 3."""
        origin, basis, k, verts_k, facets_k = self._ensure_geom()
        if k > 3:
            raise DimensionTooHigh("exact triangulation limited to dim <= 3")
        vs = list(verts_k)
        if k == 0:
            return [tuple(vs)]
        if k == 1:
            lo = min(vs)
            hi = max(vs)
            return [(lo, hi)]
        if k == 2:
            ring = self._order_polygon(vs)
            return [(ring[0], ring[i], ring[i + 1]) for i in range(1, len(ring) - 1)]
        # k == 3: cone facet triangles to a fixed apex.
        apex = vs[0]
        tets = []
        for a, b in facets_k:
            if dot(a, apex) == b:
                continue
            on_facet = [v for v in vs if dot(a, v) == b]
            ring = _order_in_plane(on_facet, a)
            for i in range(1, len(ring) - 1):
                tets.append((apex, ring[0], ring[i], ring[i + 1]))
        return tets

    def triangulate(self):
        """Simplices (ambient vertex tuples) with disjoint interiors covering self."""
        origin, basis, k, _, _ = self._ensure_geom()
        out = []
        for simplex in self._triangulate_local():
            out.append(tuple(from_hull_coords(origin, basis, s) for s in simplex))
        return out

    def minkowski_sum(self, other):
        if not isinstance(other, Polytope):
            raise DimensionMismatch("minkowski_sum needs two polytopes")
        if other.dim != self.dim:
            raise DimensionMismatch(f"ambient dims differ: {self.dim} vs {other.dim}")
        return Polytope.from_points(
            [vadd(u, v) for u in self.vertices for v in other.vertices], self.dim
        )

    def distance_linf(self, point):
        """Exact l-inf distance from a point to the polytope, via LP."""
        point = qvec(point)
        d = self.dim
        n = len(self.vertices)
        # Variables (lambda_1..n, t): minimize t, |point - sum lambda v|_inf <= t.
        A_ub = []
        b_ub = []
        for i in range(d):
            row = [v[i] for v in self.vertices] + [ONE]
            A_ub.append([-x for x in row[:-1]] + [-ONE])
            b_ub.append(-point[i])
            A_ub.append([x for x in row[:-1]] + [-ONE])
            b_ub.append(point[i])
        for j in range(n):
            A_ub.append([-ONE if jj == j else ZERO for jj in range(n)] + [ZERO])
            b_ub.append(ZERO)
        A_eq = [[ONE] * n + [ZERO]]
        b_eq = [ONE]
        res = lp.solve_lp([ZERO] * n + [ONE], A_ub, b_ub, A_eq, b_eq)
        return res.value


def _order_in_plane(points, normal):
    """Cyclic order of coplanar 3D points around their centroid."""
    # Build a 2D frame inside the plane.
    ns = nullspace([list(normal)])
    b1, b2 = ns[0], ns[1]
    proj = [(dot(b1, p), dot(b2, p), p) for p in points]
    poly = Polytope(2, [(x, y) for x, y, _ in proj]) if len(points) > 2 else None
    if poly is None:
        return points
    ring2d = poly._order_polygon([(x, y) for x, y, _ in proj])
    back = {}
    for x, y, p in proj:
        back[(x, y)] = p
    return [back[s] for s in ring2d]


class Ball(ConvexBody):
    """Closed euclidean ball; the one non-polyhedral body the examples need."""

    def __init__(self, center, radius):
        self.center = qvec(center)
        self.radius = Fraction(radius)
        self.dim = len(self.center)
        if self.radius < 0:
            raise ValueError("negative radius")

    def contains(self, point):
        point = qvec(point)
        d2 = sum((x - c) ** 2 for x, c in zip(point, self.center))
        return d2 <= self.radius**2

    def bounding_box(self):
        r = self.radius
        return (
            tuple(c - r for c in self.center),
            tuple(c + r for c in self.center),
        )

    def inner_point(self):
        return self.center

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and other.center == self.center
            and other.radius == self.radius
        )

    def __repr__(self):
        return f"Ball(center={tuple(map(str, self.center))}, radius={self.radius})"


class OracleBody(ConvexBody):
    """Convex body given by a membership predicate plus bounding data."""

    def __init__(self, dim, membership, bbox, inner):
        self.dim = dim
        self.membership = membership
        self._bbox = (qvec(bbox[0]), qvec(bbox[1]))
        self._inner = qvec(inner)

    def contains(self, point):
        return bool(self.membership(point))

    def bounding_box(self):
        return self._bbox

    def inner_point(self):
        return self._inner


def minkowski_sum(a, b):
    return a.minkowski_sum(b)


def volume(p):
    return p.volume()


def triangulate(p):
    return p.triangulate()


class UpperHull:
    """Concave upper envelope of lifted points (m_i, t_i) over conv{m_i}.

    Cells are the linearity domains (a regular subdivision of the base
    polytope); each carries the affine function (g, h): value = <g, s> + h in
    affine-hull coordinates of the base.
    """

    def __init__(self, base, origin, basis, k, cells):
        self.base = base  # Polytope (ambient)
        self.origin = origin
        self.basis = basis
        self.k = k
        self.cells = cells  # list of (Polytope ambient, verts_local, (g, h))

    def value_local(self, s):
        return min(dot(g, s) + h for _, _, (g, h) in self.cells)

    def value(self, point):
        point = qvec(point)
        if not self.base.contains(point):
            return None
        s = hull_coords(self.origin, self.basis, point)
        if s is None:
            return None
        return self.value_local(s)

    def vertex_values(self):
        """All cell vertices with envelope values, in ambient coordinates."""
        out = {}
        for cell, verts_local, (g, h) in self.cells:
            for v_amb, s in zip(cell.vertices, verts_local):
                out[v_amb] = dot(g, s) + h
        return out

    def max_value(self):
        return max(v for v in self.vertex_values().values())


def upper_hull(points, dim):
    """Concave upper envelope of lifted points ((base in M_R), value).

    Returns an UpperHull.  Exact path, base intrinsic dimension <= 3.
    """
    best = {}
    for p, t in points:
        p = qvec(p)
        t = Fraction(t)
        if len(p) != dim:
            raise DimensionMismatch("lifted point of wrong dimension")
        if p not in best or t > best[p]:
            best[p] = t
    base_pts = list(best)
    base = Polytope.from_points(base_pts, dim)
    origin, basis, k = affine_hull(base_pts)
    if k > 3:
        raise DimensionTooHigh("exact upper hull limited to base dim <= 3")
    lifted = [(hull_coords(origin, basis, p), t) for p, t in best.items()]
    if k == 0:
        cell = Polytope(dim, [base_pts[0]], _trusted=True)
        return UpperHull(base, origin, basis, 0, [(cell, [()], ((), best[base_pts[0]]))])

    # Float pre-pass rejects almost all candidate planes; only near-dominating
    # ones are verified exactly, so the result stays exact.
    import numpy as np

    sf = np.array([[float(x) for x in s] for s, _ in lifted])
    tf = np.array([float(t) for _, t in lifted])
    scale = max(1.0, float(np.abs(tf).max()), float(np.abs(sf).max()))
    planes = {}
    for sub in itertools.combinations(range(len(lifted)), k + 1):
        mat = np.empty((k + 1, k + 1))
        mat[:, :k] = sf[list(sub)]
        mat[:, k] = 1.0
        try:
            ghf = np.linalg.solve(mat, tf[list(sub)])
        except np.linalg.LinAlgError:
            ghf = None
        if ghf is not None:
            margin = sf @ ghf[:k] + ghf[k] - tf
            if margin.min() < -1e-7 * scale:
                continue
        rows = [list(lifted[i][0]) + [ONE] for i in sub]
        rhs = [lifted[i][1] for i in sub]
        gh = solve(rows, rhs)
        if gh is None:
            continue
        g, h = gh[:k], gh[k]
        if all(dot(g, s) + h >= t for s, t in lifted):
            planes[(g, h)] = None
    planes = list(planes)

    # Facet inequalities of the base polytope, in this function's frame.
    base_local = [hull_coords(origin, basis, v) for v in base.vertices]
    base_facets = _facets_from_vertices(base_local, k)
    cells = []
    for i, (g, h) in enumerate(planes):
        ineqs = list(base_facets)
        for j, (g2, h2) in enumerate(planes):
            if j == i:
                continue
            ineqs.append((vsub(g, g2), h2 - h))
        verts = enumerate_vertices(ineqs, [], k)
        if not verts:
            continue
        verts = extreme_points(verts)
        _, _, kk = affine_hull(verts)
        if kk < k:
            continue
        amb = [from_hull_coords(origin, basis, s) for s in verts]
        cell = Polytope.from_points(amb, dim)
        local = [hull_coords(origin, basis, v) for v in cell.vertices]
        cells.append((cell, local, (g, h)))
    return UpperHull(base, origin, basis, k, cells)


def shrink(body, eps):
    """The inner parallel body at distance eps from the relative boundary."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0:
        return body
    if isinstance(body, EmptyBody):
        return body
    if isinstance(body, Ball):
        r = body.radius - eps
        if r < 0:
            return EmptyBody(body.dim)
        return Ball(body.center, r)
    if isinstance(body, Polytope):
        origin, basis, k, verts_k, facets = body._ensure_geom()
        if k == 0:
            return body
        gram = [[dot(bi, bj) for bj in basis] for bi in basis]
        offset = []
        for a, b in facets:
            z = solve(gram, list(a))
            norm = sqrt_upper(dot(a, z))
            offset.append((a, b - eps * norm))
        verts = enumerate_vertices(offset, [], k)
        if not verts:
            return EmptyBody(body.dim)
        amb = [from_hull_coords(origin, basis, s) for s in extreme_points(verts)]
        return Polytope(body.dim, amb)
    if isinstance(body, OracleBody):
        # Conservative oracle: require an eps-ball of probe directions to stay
        # inside; approximate (the probes subsample the sphere).
        dirs = []
        for i in range(body.dim):
            e = [ZERO] * body.dim
            e[i] = eps
            dirs.append(tuple(e))
            dirs.append(tuple(-x for x in e))

        def member(point):
            from .qlinalg import vadd

            return all(body.contains(vadd(qvec(point), d)) for d in dirs)

        if not member(body.inner_point()):
            return EmptyBody(body.dim)
        return OracleBody(body.dim, member, body.bounding_box(), body.inner_point())
    raise TypeError(f"shrink not supported for {type(body).__name__}")
