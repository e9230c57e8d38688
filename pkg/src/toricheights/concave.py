"""The roof-function calculus.

Two dual families of objects live here:

* PAConcave -- finite, concave, piecewise-affine functions on N_R, stored as
  the pointwise min of affine pieces f(x) = min_i (<m_i, x> + c_i).  These
  are tropical Green's functions; conical ones (all c_i = 0) are support
  functions.
* Roof -- closed concave functions on a compact convex set in M_R with
  values in R u {-inf}: exact piecewise-affine roofs (PARoof), indicators,
  analytic expressions, and lazy sup-convolutions.

The Legendre-Fenchel transform (concave convention, f*(y) = inf_x
(<y,x> - f(x))) moves between the two families and is exact on the
piecewise-affine side.
"""

from fractions import Fraction

import numpy as np

from . import kernels, lp
from .expr import compile_expression, format_expression, parse_expression
from .polytopes import (
    Ball,
    ConvexBody,
    DimensionMismatch,
    Polytope,
    enumerate_rays,
    enumerate_vertices,
    upper_hull,
)
from .qlinalg import ONE, ZERO, dot, qvec, vadd, vscale, vsub

MINUS_INF = float("-inf")


class NotConical(ValueError):
    pass


class UnsupportedCombination(TypeError):
    pass


def _norm_pieces(pieces):
    out = []
    for m, c in pieces:
        out.append((qvec(m), Fraction(c)))
    return sorted(set(out))


class PAConcave:
    """Concave piecewise-affine function f(x) = min_i (<m_i, x> + c_i) on N_R."""

    def __init__(self, dim, pieces, prune=True):
        self.dim = dim
        pieces = _norm_pieces(pieces)
        if not pieces:
            raise ValueError("need at least one affine piece")
        for m, _ in pieces:
            if len(m) != dim:
                raise DimensionMismatch("piece of wrong dimension")
        if prune and len(pieces) > 1:
            pieces = self._prune(dim, pieces)
        self.pieces = tuple(pieces)

    @staticmethod
    def _prune(dim, pieces):
        # A piece is redundant when it is never strictly below all others.
        # Sampling first: any piece that wins strictly at some rational point
        # is certainly kept (exact check at that point), so the LP only runs
        # for the leftovers.
        certified = set()
        mf = np.array([[float(x) for x in m] for m, _ in pieces])
        cf = np.array([float(c) for _, c in pieces])
        rng = np.random.default_rng(len(pieces) * 31 + dim)
        samples = rng.standard_normal((24 * dim, dim)) * 3.0
        for x in samples:
            vals = mf @ x + cf
            i = int(vals.argmin())
            if i in certified:
                continue
            xq = tuple(Fraction(float(v)).limit_denominator(2**20) for v in x)
            m, c = pieces[i]
            mine = dot(m, xq) + c
            if all(j == i or dot(mj, xq) + cj > mine for j, (mj, cj) in enumerate(pieces)):
                certified.add(i)
        kept = list(pieces)
        i = 0
        while i < len(kept):
            if kept[i] in (pieces[j] for j in certified):
                i += 1
                continue
            m, c = kept[i]
            others = [p for j, p in enumerate(kept) if j != i]
            if not others:
                break
            # feasible: max_x min_o ((m_o - m) x + c_o - c) > 0 keeps the piece.
            rel = [(vsub(mo, m), co - c) for mo, co in others]
            status, value, _ = lp.max_min_affine(rel, dim)
            if status == lp.UNBOUNDED or (status == lp.OPTIMAL and value > 0):
                i += 1
            else:
                kept.pop(i)
        return kept

    def __eq__(self, other):
        return (
            isinstance(other, PAConcave)
            and other.dim == self.dim
            and other.pieces == self.pieces
        )

    def __hash__(self):
        return hash((self.dim, self.pieces))

    def __repr__(self):
        terms = [f"<{tuple(map(str, m))},x>+{c}" for m, c in self.pieces]
        return "PAConcave(min of " + ", ".join(terms) + ")"

    def eval(self, x):
        x = qvec(x)
        return min(dot(m, x) + c for m, c in self.pieces)

    def __call__(self, x):
        return self.eval(x)

    def __add__(self, other):
        if isinstance(other, PAConcave):
            if other.dim != self.dim:
                raise DimensionMismatch("dims differ")
            # min_i a_i + min_j b_j = min_{ij} (a_i + b_j)
            return PAConcave(
                self.dim,
                [
                    (vadd(m1, m2), c1 + c2)
                    for m1, c1 in self.pieces
                    for m2, c2 in other.pieces
                ],
            )
        return NotImplemented

    def add_constant(self, c):
        c = Fraction(c)
        return PAConcave(self.dim, [(m, cc + c) for m, cc in self.pieces], prune=False)

    def scale(self, a):
        a = Fraction(a)
        if a < 0:
            raise ValueError("scale factor must be >= 0")
        if a == 0:
            return PAConcave(self.dim, [(tuple(ZERO for _ in range(self.dim)), ZERO)])
        return PAConcave(self.dim, [(vscale(a, m), a * c) for m, c in self.pieces], prune=False)

    def recession(self):
        """rec(f)(x) = lim f(t x)/t; drops the constants."""
        return PAConcave(self.dim, [(m, ZERO) for m, _ in self.pieces])

    @property
    def is_conical(self):
        return all(c == 0 for _, c in self.pieces)

    def max_value(self):
        """sup over N_R (finite iff 0 in conv of slopes); None when +inf."""
        status, value, _ = lp.max_min_affine(self.pieces, self.dim)
        return value if status == lp.OPTIMAL else None

    def stability_set(self):
        if not self.is_conical:
            raise NotConical("stability set needs a conical function")
        return Polytope.from_points([m for m, _ in self.pieces], self.dim)

    def linearity_regions(self):
        """H-reps of the closed regions where each piece attains the min."""
        regions = []
        for i, (m, c) in enumerate(self.pieces):
            ineqs = []
            for j, (m2, c2) in enumerate(self.pieces):
                if j != i:
                    ineqs.append((vsub(m, m2), c2 - c))
            regions.append(((m, c), ineqs))
        return regions


def pa_from_support(fan_pieces, dim):
    return PAConcave(dim, [(m, ZERO) for m in fan_pieces])


# ---------------------------------------------------------------------------
# Roofs


class Roof:
    """Closed concave function on a compact convex body, -inf outside."""

    dim = None
    domain = None
    is_exact = False

    def eval(self, y):
        raise NotImplementedError

    def eval_batch(self, pts):
        """Vectorized float evaluation; -inf for out-of-domain points."""
        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            v = self.eval([Fraction(x).limit_denominator(10**12) for x in p])
            out[i] = float(v) if v is not MINUS_INF else MINUS_INF
        return out

    def sup(self):
        """Exact supremum when available, else None."""
        return None

    def add_constant(self, c):
        return ShiftedRoof(self, Fraction(c))

    def scale(self, a):
        return ScaledRoof(self, Fraction(a))

    def restrict(self, body):
        return RestrictedRoof(self, body)


class PARoof(Roof):
    """Concave upper envelope of finitely many lifted rational points."""

    is_exact = True

    def __init__(self, lifted, dim):
        self.lifted = tuple(sorted((qvec(p), Fraction(t)) for p, t in lifted))
        self.dim = dim
        self.hull = upper_hull(self.lifted, dim)
        self.domain = self.hull.base
        self._planes_amb = None

    def __repr__(self):
        return f"PARoof({len(self.lifted)} lifted points, dim={self.dim})"

    def eval(self, y):
        v = self.hull.value(y)
        return MINUS_INF if v is None else v

    def _ambient_planes(self):
        # Planes as ambient float data; only full-dimensional domains get a
        # float fast path (thin domains integrate to zero anyway).
        if self._planes_amb is None:
            ineqs, eqs = self.domain.ambient_facets()
            if eqs:
                self._planes_amb = "thin"
            else:
                from .qlinalg import solve_affine

                origin, basis, k = self.hull.origin, self.hull.basis, self.hull.k
                planes = []
                for _, _, (g, h) in self.hull.cells:
                    sol = solve_affine([list(b) for b in basis], list(g))
                    g_amb = sol[0]
                    planes.append((g_amb, h - dot(g_amb, origin)))
                A = np.array([[float(x) for x in a] for a, _ in ineqs])
                b = np.array([float(bb) for _, bb in ineqs])
                G = np.array([[float(x) for x in g] for g, _ in planes])
                H = np.array([float(hh) for _, hh in planes])
                self._planes_amb = (A, b, G, H)
        return self._planes_amb

    def eval_batch(self, pts):
        data = self._ambient_planes()
        pts = np.asarray(pts, dtype=np.float64)
        if data == "thin":
            return np.full(len(pts), MINUS_INF)
        A, b, G, H = data
        vals = (pts @ G.T + H).min(axis=1)
        inside = (pts @ A.T <= b + 1e-12).all(axis=1)
        vals[~inside] = MINUS_INF
        return vals

    def sup(self):
        return self.hull.max_value()

    def vertex_values(self):
        return self.hull.vertex_values()

    def add_constant(self, c):
        c = Fraction(c)
        return PARoof([(p, t + c) for p, t in self.lifted], self.dim)

    def scale(self, a):
        a = Fraction(a)
        if a < 0:
            raise ValueError("scale factor must be >= 0")
        if a == 0:
            z = tuple(ZERO for _ in range(self.dim))
            return PARoof([(z, ZERO)], self.dim)
        return PARoof([(vscale(a, p), a * t) for p, t in self.lifted], self.dim)

    def restrict(self, body):
        if isinstance(body, Polytope):
            cut = _intersect_polytopes(self.domain, body)
            if cut is None:
                raise ValueError("restriction body misses the domain")
            pts = [(v, self.hull.value(v)) for v in cut.vertices]
            # Envelope breakpoints inside the restriction keep the function exact.
            for v in self.hull.vertex_values():
                if body.contains(v):
                    pts.append((v, self.hull.value(v)))
            return PARoof(pts, self.dim)
        return RestrictedRoof(self, body)


def _intersect_polytopes(a, b):
    """Exact intersection of two polytopes (dim <= 3), None if empty."""
    ia, ea = a.ambient_facets()
    ib, eb = b.ambient_facets()
    # Work inside the joint affine hull when there are equalities.
    eqs = ea + eb
    ineqs = ia + ib
    if eqs:
        from .qlinalg import nullspace, solve

        rows = [list(aa) for aa, _ in eqs]
        rhs = [bb for _, bb in eqs]
        from .qlinalg import solve_affine

        sol = solve_affine(rows, rhs)
        if sol is None:
            return None
        x0, basis = sol
        if not basis:
            if all(dot(aa, x0) <= bb for aa, bb in ineqs):
                return Polytope(a.dim, [x0])
            return None
        loc_ineqs = []
        for aa, bb in ineqs:
            arow = tuple(dot(aa, bvec) for bvec in basis)
            loc_ineqs.append((arow, bb - dot(aa, x0)))
        verts = enumerate_vertices(loc_ineqs, [], len(basis))
        if not verts:
            return None
        amb = []
        for s in verts:
            p = x0
            for ci, bvec in zip(s, basis):
                p = vadd(p, vscale(ci, bvec))
            amb.append(p)
        return Polytope.from_points(amb, a.dim)
    verts = enumerate_vertices(ineqs, [], a.dim)
    if not verts:
        return None
    return Polytope.from_points(verts, a.dim)


def indicator(body):
    """iota_body: 0 on the body, -inf outside."""
    if isinstance(body, Polytope) and body.dim <= 3:
        return PARoof([(v, ZERO) for v in body.vertices], body.dim)
    return IndicatorRoof(body)


class IndicatorRoof(Roof):
    """Indicator of a non-polytopal body (balls, oracles)."""

    is_exact = True

    def __init__(self, body):
        self.body = body
        self.domain = body
        self.dim = body.dim

    def __repr__(self):
        return f"IndicatorRoof({self.body!r})"

    def eval(self, y):
        return ZERO if self.body.contains(y) else MINUS_INF

    def eval_batch(self, pts):
        out = np.zeros(len(pts))
        if isinstance(self.body, Ball):
            c = np.array([float(x) for x in self.body.center])
            r = float(self.body.radius)
            d2 = ((np.asarray(pts, dtype=float) - c) ** 2).sum(axis=1)
            out[d2 > r * r + 1e-12] = MINUS_INF
            return out
        if hasattr(self.body, "contains_batch"):
            out[~self.body.contains_batch(np.asarray(pts, dtype=float))] = MINUS_INF
            return out
        for i, p in enumerate(pts):
            if not self.body.contains([Fraction(x).limit_denominator(10**12) for x in p]):
                out[i] = MINUS_INF
        return out

    def sup(self):
        return ZERO


class ShiftedRoof(Roof):
    def __init__(self, base, c):
        self.base = base
        self.shift = Fraction(c)
        self.dim = base.dim
        self.domain = base.domain
        self.is_exact = base.is_exact

    def eval(self, y):
        v = self.base.eval(y)
        return v if v is MINUS_INF else v + self.shift

    def eval_batch(self, pts):
        return self.base.eval_batch(pts) + float(self.shift)

    def sup(self):
        s = self.base.sup()
        return None if s is None else s + self.shift

    def add_constant(self, c):
        return ShiftedRoof(self.base, self.shift + Fraction(c))


class ScaledRoof(Roof):
    """(a . f)(y) = a f(y / a) for a > 0 (the roof of the scaled divisor)."""

    def __init__(self, base, a):
        a = Fraction(a)
        if a <= 0:
            raise ValueError("scale factor must be > 0")
        self.base = base
        self.factor = a
        self.dim = base.dim
        self.is_exact = base.is_exact
        dom = base.domain
        if isinstance(dom, Polytope):
            self.domain = dom.scale(a)
        elif isinstance(dom, Ball):
            self.domain = Ball(vscale(a, dom.center), a * dom.radius)
        else:
            self.domain = dom

    def eval(self, y):
        y = qvec(y)
        inv = ONE / self.factor
        v = self.base.eval(vscale(inv, y))
        return v if v is MINUS_INF else self.factor * v

    def eval_batch(self, pts):
        pts = np.asarray(pts, dtype=float) / float(self.factor)
        return float(self.factor) * self.base.eval_batch(pts)

    def sup(self):
        s = self.base.sup()
        return None if s is None else self.factor * s


class RestrictedRoof(Roof):
    def __init__(self, base, body):
        self.base = base
        self.body = body
        self.domain = body
        self.dim = base.dim
        self.is_exact = False

    def eval(self, y):
        if not self.body.contains(y):
            return MINUS_INF
        return self.base.eval(y)

    def eval_batch(self, pts):
        vals = self.base.eval_batch(pts)
        if isinstance(self.body, Ball):
            c = np.array([float(x) for x in self.body.center])
            r = float(self.body.radius)
            d2 = ((np.asarray(pts, dtype=float) - c) ** 2).sum(axis=1)
            vals[d2 > r * r + 1e-12] = MINUS_INF
        elif isinstance(self.body, Polytope):
            ineqs, eqs = self.body.ambient_facets()
            if eqs:
                vals[:] = MINUS_INF
            elif ineqs:
                A = np.array([[float(x) for x in a] for a, _ in ineqs])
                b = np.array([float(bb) for _, bb in ineqs])
                pts = np.asarray(pts, dtype=float)
                vals[(pts @ A.T > b + 1e-12).any(axis=1)] = MINUS_INF
        else:
            for i, p in enumerate(pts):
                if not self.body.contains([Fraction(x).limit_denominator(10**12) for x in p]):
                    vals[i] = MINUS_INF
        return vals

    def sup(self):
        return None


class AnalyticRoof(Roof):
    """Roof given by a closed-form concave expression on a convex body."""

    def __init__(self, src_or_ast, body, boundary="minus_infinity", radial_profile=None):
        if isinstance(src_or_ast, str):
            self.ast = parse_expression(src_or_ast, body.dim)
        else:
            self.ast = src_or_ast
        self.body = body
        self.domain = body
        self.dim = body.dim
        self.boundary = boundary
        self.radial_profile = radial_profile  # 1D profile source for balls
        self._ops, self._args = compile_expression(self.ast)

    def __repr__(self):
        return f"AnalyticRoof({format_expression(self.ast)!r})"

    def eval(self, y):
        if not self.body.contains(y):
            return MINUS_INF
        pts = np.array([[float(x) for x in y]])
        return float(kernels.eval_program(self._ops, self._args, pts)[0])

    def eval_batch(self, pts):
        vals = kernels.eval_program(self._ops, self._args, np.asarray(pts, dtype=float))
        if isinstance(self.body, Ball):
            c = np.array([float(x) for x in self.body.center])
            r = float(self.body.radius)
            d2 = ((np.asarray(pts, dtype=float) - c) ** 2).sum(axis=1)
            vals[d2 > r * r + 1e-12] = MINUS_INF
        elif isinstance(self.body, Polytope):
            ineqs, eqs = self.body.ambient_facets()
            if ineqs and not eqs:
                A = np.array([[float(x) for x in a] for a, _ in ineqs])
                b = np.array([float(bb) for _, bb in ineqs])
                p = np.asarray(pts, dtype=float)
                vals[(p @ A.T > b + 1e-12).any(axis=1)] = MINUS_INF
        return vals


class RadialRoof(Roof):
    """Roof on a centered ball whose value depends only on the radius.

    The profile is an expression in y1 (= the radius).  Numeric integration
    reduces to one dimension through `profile_in_radius`.
    """

    def __init__(self, profile_src, ball):
        self.profile_ast = parse_expression(profile_src, 1)
        self.body = ball
        self.domain = ball
        self.dim = ball.dim
        self._ops, self._args = compile_expression(self.profile_ast)

    def __repr__(self):
        return f"RadialRoof({format_expression(self.profile_ast)!r} in r)"

    def profile_in_radius(self, r):
        return kernels.eval_program(self._ops, self._args, np.asarray(r, dtype=float)[:, None])

    def eval(self, y):
        if not self.body.contains(y):
            return MINUS_INF
        c = self.body.center
        r2 = sum((Fraction(x) - cc) ** 2 for x, cc in zip(y, c))
        r = float(r2) ** 0.5
        return float(self.profile_in_radius(np.array([r]))[0])

    def eval_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        c = np.array([float(x) for x in self.body.center])
        r = np.sqrt(((pts - c) ** 2).sum(axis=1))
        vals = self.profile_in_radius(r)
        vals[r > float(self.body.radius) + 1e-12] = MINUS_INF
        return vals


class SupConvRoof(Roof):
    """Lazy f [+] iota_body: value at y is the max of f over the set y - body.

    The exact combinations are folded eagerly elsewhere; this wrapper covers
    the analytic [+] indicator route, evaluated by concave maximization with
    golden-section line searches.  The search brackets are intersected with
    the effective domain of f, so -inf plateaus never mislead the search; a
    coarse-grid rescue restarts points whose sweeps got stuck infeasible.
    """

    GOLDEN_ITERS = 48  # interval shrinks by phi^48 ~ 1e-10
    SWEEPS = 3

    def __init__(self, f, body, domain):
        if body.dim != f.dim:
            raise DimensionMismatch("dims differ")
        self.f = f
        self.body = body
        self.domain = domain
        self.dim = f.dim
        if isinstance(body, Polytope):
            origin, basis, k = body.hull_frame()
            self._origin = np.array([float(x) for x in origin])
            self._basis = (
                np.array([[float(x) for x in b] for b in basis]).reshape(k, f.dim)
                if k
                else np.zeros((0, f.dim))
            )
            self._facets = body.facets_local()
            self._k = k
            from .polytopes import hull_coords

            s0 = hull_coords(origin, basis, body.inner_point())
            self._s0 = np.array([float(x) for x in s0]) if k else np.zeros(0)
            lo = [min(float(v[i]) for v in _local_vertices(body)) for i in range(k)]
            hi = [max(float(v[i]) for v in _local_vertices(body)) for i in range(k)]
            self._local_bbox = (np.array(lo), np.array(hi))
        else:
            self._k = f.dim

    def eval(self, y):
        v = self.eval_batch(np.array([[float(x) for x in y]]))[0]
        return MINUS_INF if v == MINUS_INF else float(v)

    # -- feasibility intervals ------------------------------------------

    def _fdom_interval(self, u0, w):
        """t-range with u0 + t w inside dom(f), per row of u0."""
        n = len(u0)
        lo = np.full(n, -np.inf)
        hi = np.full(n, np.inf)
        dom = self.f.domain
        if isinstance(dom, Ball):
            c = np.array([float(x) for x in dom.center])
            r = float(dom.radius)
            v = u0 - c
            a2 = float(w @ w)
            if a2 < 1e-30:
                bad = (v * v).sum(axis=1) > r * r
                lo[bad], hi[bad] = 1.0, 0.0
                return lo, hi
            bq = 2.0 * (v @ w)
            cq = (v * v).sum(axis=1) - r * r
            disc = bq * bq - 4 * a2 * cq
            bad = disc < 0
            sq = np.sqrt(np.maximum(disc, 0.0))
            lo = (-bq - sq) / (2 * a2)
            hi = (-bq + sq) / (2 * a2)
            lo[bad], hi[bad] = 1.0, 0.0
            return lo, hi
        if isinstance(dom, Polytope):
            ineqs, eqs = dom.ambient_facets()
            if eqs:
                return lo, hi  # thin domain: unsupported fast path, no bound
            for a, b in ineqs:
                av = np.array([float(x) for x in a])
                coef = float(av @ w)
                rhs = float(b) - u0 @ av
                if abs(coef) < 1e-14:
                    bad = rhs < -1e-12
                    lo[bad], hi[bad] = 1.0, 0.0
                    continue
                bound = rhs / coef
                if coef > 0:
                    hi = np.minimum(hi, bound)
                else:
                    lo = np.maximum(lo, bound)
        return lo, hi

    def _search(self, pts, cur, value, extent, directions):
        phi = (np.sqrt(5.0) - 1.0) / 2.0
        sweeps = 1 if len(directions) == 1 else self.SWEEPS
        for _ in range(sweeps):
            for dvec in directions:
                lo, hi = extent(cur, dvec)
                empty = lo > hi
                lo = np.where(empty, 0.0, lo)
                hi = np.where(empty, 0.0, hi)
                a_t, b_t = lo, hi
                c_t = b_t - phi * (b_t - a_t)
                d_t = a_t + phi * (b_t - a_t)
                fc = value(cur + c_t[:, None] * dvec)
                fd = value(cur + d_t[:, None] * dvec)
                for _ in range(self.GOLDEN_ITERS):
                    take_c = fc >= fd
                    b_t = np.where(take_c, d_t, b_t)
                    a_t = np.where(take_c, a_t, c_t)
                    c_t = b_t - phi * (b_t - a_t)
                    d_t = a_t + phi * (b_t - a_t)
                    fc = value(cur + c_t[:, None] * dvec)
                    fd = value(cur + d_t[:, None] * dvec)
                cur = cur + (0.5 * (a_t + b_t))[:, None] * dvec
        return cur

    def eval_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        n = len(pts)
        if isinstance(self.body, Ball):
            center = np.array([float(x) for x in self.body.center])
            radius = float(self.body.radius)

            def value(w_):
                return self.f.eval_batch(pts - center - w_)

            def extent(w_, dvec):
                a2 = float(dvec @ dvec)
                bq = 2.0 * (w_ @ dvec)
                cq = (w_ * w_).sum(axis=1) - radius * radius
                disc = np.maximum(bq * bq - 4 * a2 * cq, 0.0)
                sq = np.sqrt(disc)
                lo, hi = (-bq - sq) / (2 * a2), (-bq + sq) / (2 * a2)
                u0 = pts - center - w_
                flo, fhi = self._fdom_interval(u0, -dvec)
                return np.maximum(lo, flo), np.minimum(hi, fhi)

            cur = self._search(pts, np.zeros((n, self.dim)), value, extent, np.eye(self.dim))
            vals = value(cur)
            return vals

        k = self._k
        if k == 0:
            return self.f.eval_batch(pts - self._origin)
        A = np.array([[float(x) for x in a] for a, _ in self._facets])
        bvec = np.array([float(bb) for _, bb in self._facets])

        def value(s_):
            return self.f.eval_batch(pts - self._origin - s_ @ self._basis)

        def extent(s_, dvec):
            nloc = len(s_)
            lo = np.full(nloc, -np.inf)
            hi = np.full(nloc, np.inf)
            slack = bvec - s_ @ A.T
            coef = A @ dvec
            for j in range(A.shape[0]):
                cj = coef[j]
                if abs(cj) < 1e-14:
                    continue
                bound = slack[:, j] / cj
                if cj > 0:
                    hi = np.minimum(hi, bound)
                else:
                    lo = np.maximum(lo, bound)
            u0 = pts - self._origin - s_ @ self._basis
            w = -(dvec @ self._basis)
            flo, fhi = self._fdom_interval(u0, w)
            return np.maximum(lo, flo), np.minimum(hi, fhi)

        cur = self._search(pts, np.tile(self._s0, (n, 1)), value, extent, np.eye(k))
        vals = value(cur)
        stuck = ~np.isfinite(vals)
        if stuck.any() and k <= 2:
            # Restart stuck points from the best corner of a coarse body grid.
            lo, hi = self._local_bbox
            axes = [np.linspace(lo[i], hi[i], 9) for i in range(k)]
            grid = np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, k)
            inside = (grid @ A.T <= bvec + 1e-12).all(axis=1)
            grid = grid[inside]
            sub = np.where(stuck)[0]
            best = np.tile(self._s0, (len(sub), 1))
            best_val = np.full(len(sub), -np.inf)
            for g in grid:
                v = self.f.eval_batch(pts[sub] - self._origin - g @ self._basis)
                better = v > best_val
                best_val = np.where(better, v, best_val)
                best[better] = g
            # One more sweep pass from the improved starts.
            def value_sub(s_):
                return self.f.eval_batch(pts[sub] - self._origin - s_ @ self._basis)

            def extent_sub(s_, dvec):
                nloc = len(s_)
                lo2 = np.full(nloc, -np.inf)
                hi2 = np.full(nloc, np.inf)
                slack = bvec - s_ @ A.T
                coef = A @ dvec
                for j in range(A.shape[0]):
                    cj = coef[j]
                    if abs(cj) < 1e-14:
                        continue
                    bound = slack[:, j] / cj
                    if cj > 0:
                        hi2 = np.minimum(hi2, bound)
                    else:
                        lo2 = np.maximum(lo2, bound)
                u0 = pts[sub] - self._origin - s_ @ self._basis
                w = -(dvec @ self._basis)
                flo, fhi = self._fdom_interval(u0, w)
                return np.maximum(lo2, flo), np.minimum(hi2, fhi)

            cur_sub = self._search(pts[sub], best, value_sub, extent_sub, np.eye(k))
            vals[sub] = value_sub(cur_sub)
        return vals


def _local_vertices(body):
    origin, basis, k = body.hull_frame()
    from .polytopes import hull_coords

    return [hull_coords(origin, basis, v) for v in body.vertices]


# ---------------------------------------------------------------------------
# Operations


def lf_transform(f):
    """Legendre-Fenchel transform of a PAConcave: a PARoof on its slope hull."""
    if not isinstance(f, PAConcave):
        raise UnsupportedCombination("exact transform needs a piecewise-affine input")
    return PARoof([(m, -c) for m, c in f.pieces], f.dim)


def lf_transform_inv(r):
    """Inverse transform of a PARoof back to a PAConcave."""
    if not isinstance(r, PARoof):
        raise UnsupportedCombination("exact inverse transform needs a PARoof")
    vv = r.vertex_values()
    return PAConcave(r.dim, [(p, -t) for p, t in vv.items()])


def sup_convolution(f, g):
    """(f [+] g)(y) = sup{f(y1) + g(y2) : y1 + y2 = y}."""
    # Constant shifts commute with [+].
    if isinstance(f, ShiftedRoof):
        return sup_convolution(f.base, g).add_constant(f.shift)
    if isinstance(g, ShiftedRoof):
        return sup_convolution(f, g.base).add_constant(g.shift)
    f = _as_exact_roof(f)
    g = _as_exact_roof(g)
    if isinstance(f, PARoof) and isinstance(g, PARoof):
        if f is g or f.lifted == g.lifted:
            return f.scale(2)
        return PARoof(
            [(vadd(p, q), s + t) for p, s in f.lifted for q, t in g.lifted], f.dim
        )
    # Indicator of a ball or analytic operand: exactly one side may be fancy.
    for a, b in ((f, g), (g, f)):
        if isinstance(b, PARoof) or (isinstance(b, IndicatorRoof)):
            body = b.domain if isinstance(b, PARoof) else b.body
            if isinstance(b, PARoof) and not _is_indicator_paroof(b):
                continue
            dom = _domain_sum(a.domain, body)
            return SupConvRoof(a, body, dom)
    raise UnsupportedCombination(
        f"sup-convolution of {type(f).__name__} and {type(g).__name__} not supported"
    )


def _is_indicator_paroof(r):
    return all(t == 0 for _, t in r.lifted)


def _as_exact_roof(r):
    if isinstance(r, ShiftedRoof) and isinstance(r.base, PARoof):
        return r.base.add_constant(r.shift)
    if isinstance(r, IndicatorRoof) and isinstance(r.body, Polytope):
        return indicator(r.body)
    return r


def _domain_sum(a, b):
    if isinstance(a, Polytope) and isinstance(b, Polytope):
        return a.minkowski_sum(b)
    if isinstance(a, Ball) and isinstance(b, Polytope) and len(b.vertices) == 1:
        return Ball(vadd(a.center, b.vertices[0]), a.radius)
    if isinstance(a, Polytope) and isinstance(b, Ball):
        return _MinkSumBody(a, b)
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(vadd(a.center, b.center), a.radius + b.radius)
    if isinstance(a, Ball) and isinstance(b, Polytope):
        return _MinkSumBody(b, a)
    raise UnsupportedCombination("cannot form the Minkowski sum of these bodies")


class _MinkSumBody(ConvexBody):
    """Polytope (+) ball, used only as an integration/membership domain."""

    def __init__(self, polytope, ball):
        self.polytope = polytope
        self.ball = ball
        self.dim = polytope.dim

    def contains(self, point):
        point = qvec(point)
        shifted = vsub(point, self.ball.center)
        d = self.polytope.distance_linf(shifted)
        # l-inf underestimates euclidean distance by at most sqrt(d); use the
        # exact euclidean test only through the cheap certificates.
        if d is None:
            return False
        if d == 0:
            return True
        return float(d) <= float(self.ball.radius)  # approximate

    def bounding_box(self):
        (lo_p, hi_p) = self.polytope.bounding_box()
        r = self.ball.radius
        c = self.ball.center
        return (
            tuple(l + cc - r for l, cc in zip(lo_p, c)),
            tuple(h + cc + r for h, cc in zip(hi_p, c)),
        )

    def inner_point(self):
        return vadd(self.polytope.inner_point(), self.ball.center)


def recession(f):
    return f.recession()


def stability_set(f):
    return f.stability_set()


def _max_abs_over_cells(num_regions, den_regions, dim):
    """sup |num| / den over R^d for piecewise-affine num and den = max-form.

    num_regions / den_regions: lists of ((m, c), ineqs) where the affine form
    is valid on {x : ineqs}.  Exact; returns (Fraction or None for +inf).
    """
    best = ZERO
    for (mn, cn), rn in num_regions:
        for (md, cd), rd in den_regions:
            ineqs = rn + rd
            verts = enumerate_vertices(ineqs, [], dim)
            rays = enumerate_rays(ineqs, [], dim)
            for v in verts:
                num = abs(dot(mn, v) + cn)
                den = dot(md, v) + cd
                if den == 0:
                    if num != 0:
                        return None
                    continue
                best = max(best, num / den)
            for r in rays:
                num = abs(dot(mn, r))
                den = dot(md, r)
                if den == 0:
                    if num != 0:
                        return None
                    continue
                best = max(best, num / den)
    return best


def _linf_regions(dim, constant):
    """Regions and affine forms of x -> constant + |x|_inf."""
    out = []
    for i in range(dim):
        for s in (ONE, -ONE):
            m = tuple(s if j == i else ZERO for j in range(dim))
            ineqs = []
            for i2 in range(dim):
                for s2 in (ONE, -ONE):
                    m2 = tuple(s2 if j == i2 else ZERO for j in range(dim))
                    if m2 != m:
                        ineqs.append((vsub(m2, m), ZERO))
            out.append(((m, Fraction(constant)), ineqs))
    return out


def c_norm(f):
    """inf{eps : |f(x)| <= eps |x|_inf}; +inf (None) when unbounded."""
    if f.eval([ZERO] * f.dim) != 0:
        return None
    return _max_abs_over_cells(f.linearity_regions(), _linf_regions(f.dim, ZERO), f.dim)


def g_norm(f):
    """inf{eps : |f(x)| <= eps (1 + |x|_inf)}."""
    return _max_abs_over_cells(f.linearity_regions(), _linf_regions(f.dim, ONE), f.dim)


def sup_ratio(num, den):
    """sup |num(x)| / (-den(x)) for PAConcave num, den with den <= 0.

    Used by the boundary norm; returns Fraction or None for +inf.
    """
    den_regions = []
    # -den = max over pieces of -(m x + c) on the region where (m, c) is min.
    for (m, c), ineqs in den.linearity_regions():
        den_regions.append(((vsub((ZERO,) * den.dim, m), -c), ineqs))
    return _max_abs_over_cells(num.linearity_regions(), den_regions, num.dim)
