"""Rational polyhedral cones, fans, arithmetic fans, and the toric divisor
dictionary: support functions on a fan <-> divisor coefficients at rays.

Fans store only their maximal cones; lower faces are computed on demand.
Arithmetic fans are per-prime families of fans in N_R x R>=0 whose slice at
level 0 reproduces a common base fan, with only finitely many primes away
from the canonical extension.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import lp
from .concave import PAConcave
from .qlinalg import (
    ONE,
    ZERO,
    det,
    dot,
    is_zero,
    nullspace,
    primitive,
    qvec,
    rank,
    solve,
    solve_affine,
    vsub,
)

from .polytopes import DimensionTooHigh


class NotSmooth(ValueError):
    pass


class NotComplete(ValueError):
    pass


class SupportMismatch(ValueError):
    pass


class Cone:
    """Strongly convex rational polyhedral cone, by primitive generators."""

    def __init__(self, generators, _trusted=False):
        gens = [primitive(g) for g in generators]
        gens = [g for g in gens if not is_zero(g)]
        if gens:
            self.dim = len(gens[0])
        else:
            raise ValueError("zero cone: construct with Cone.zero(dim)")
        if not _trusted:
            if not self._strongly_convex(gens):
                raise ValueError("cone is not strongly convex")
            gens = self._irredundant(gens)
        self.generators = tuple(sorted(set(gens)))
        self._hrep = None

    @classmethod
    def zero(cls, dim):
        c = cls.__new__(cls)
        c.dim = dim
        c.generators = ()
        c._hrep = None
        return c

    @staticmethod
    def _strongly_convex(gens):
        # Strongly convex iff no nonzero nonnegative combination vanishes.
        n = len(gens)
        if n == 0:
            return True
        A_eq = [[g[i] for g in gens] for i in range(len(gens[0]))]
        A_eq.append([ONE] * n)
        b_eq = [ZERO] * len(gens[0]) + [ONE]
        return not lp.feasible_nonneg(A_eq, b_eq)

    @staticmethod
    def _irredundant(gens):
        kept = list(dict.fromkeys(gens))
        i = 0
        while i < len(kept):
            g = kept[i]
            others = [h for j, h in enumerate(kept) if j != i]
            if others and _in_cone_span(g, others):
                kept.pop(i)
            else:
                i += 1
        return kept

    @property
    def rank(self):
        return rank([list(g) for g in self.generators])

    @property
    def rays(self):
        return self.generators

    def __eq__(self, other):
        return isinstance(other, Cone) and other.generators == self.generators and other.dim == self.dim

    def __hash__(self):
        return hash((self.dim, self.generators))

    def __repr__(self):
        return f"Cone{self.generators}"

    def hrep(self):
        """(ineqs a with a.x <= 0, eqs e with e.x = 0) cutting out the cone."""
        if self._hrep is not None:
            return self._hrep
        gens = self.generators
        d = self.dim
        if not gens:
            eqs = [tuple(ONE if j == i else ZERO for j in range(d)) for i in range(d)]
            self._hrep = ([], eqs)
            return self._hrep
        eqs = nullspace([list(g) for g in gens])
        k = self.rank
        ineqs = {}
        if k == 1:
            g = gens[0]
            ineqs[tuple(-x for x in g)] = None
        else:
            for sub in itertools.combinations(gens, k - 1):
                rows = [list(g) for g in sub] + [list(e) for e in eqs]
                ns = nullspace(rows)
                if len(ns) != 1:
                    continue
                a = ns[0]
                lo = all(dot(a, g) <= 0 for g in gens)
                hi = all(dot(a, g) >= 0 for g in gens)
                if lo == hi:
                    continue
                if hi:
                    a = tuple(-x for x in a)
                ineqs[primitive(a)] = None
        self._hrep = (list(ineqs), [primitive(e) for e in eqs])
        return self._hrep

    def contains(self, x):
        x = qvec(x)
        ineqs, eqs = self.hrep()
        return all(dot(a, x) <= 0 for a in ineqs) and all(dot(e, x) == 0 for e in eqs)

    def contains_cone(self, other):
        return all(self.contains(g) for g in other.generators)

    def intersect(self, other):
        """Exact intersection; both cones strongly convex."""
        i1, e1 = self.hrep()
        i2, e2 = other.hrep()
        eqs = e1 + e2
        ineqs = i1 + i2
        basis = nullspace([list(e) for e in eqs]) if eqs else None
        if eqs and not basis:
            return Cone.zero(self.dim)
        if basis is None:
            loc_ineqs = [tuple(a) for a in ineqs]
            k = self.dim
            back = None
        else:
            k = len(basis)
            if k == 0:
                return Cone.zero(self.dim)
            loc_ineqs = [tuple(dot(a, b) for b in basis) for a in ineqs]
            back = basis
        rays = []
        if k == 1:
            for s in (ONE, -ONE):
                r = (s,)
                if all(dot(a, r) <= 0 for a in loc_ineqs):
                    rays.append(r)
        else:
            for sub in itertools.combinations(range(len(loc_ineqs)), k - 1):
                rows = [list(loc_ineqs[i]) for i in sub]
                ns = nullspace(rows)
                if len(ns) != 1:
                    continue
                for r in (ns[0], tuple(-x for x in ns[0])):
                    if all(dot(a, r) <= 0 for a in loc_ineqs):
                        rays.append(r)
        if back is not None:
            amb = []
            for r in rays:
                v = tuple(ZERO for _ in range(self.dim))
                for c, b in zip(r, back):
                    v = tuple(x + c * y for x, y in zip(v, b))
                amb.append(v)
            rays = amb
        rays = [primitive(r) for r in rays if not is_zero(r)]
        rays = list(dict.fromkeys(rays))
        if not rays:
            return Cone.zero(self.dim)
        return Cone(rays)

    def is_face_of(self, other):
        """Is self a face of other?  Needs a supporting functional."""
        if not other.contains_cone(self):
            return False
        mine = set(self.generators)
        rest = [g for g in other.generators if g not in mine]
        if not set(self.generators) <= set(other.generators):
            return False
        if not rest:
            return True
        # find u with u.g = 0 on self, u.g <= -1 on the rest
        d = self.dim
        A_eq = [list(g) for g in self.generators]
        b_eq = [ZERO] * len(A_eq)
        A_ub = [list(g) for g in rest]
        b_ub = [-ONE] * len(rest)
        return lp.feasible(A_ub, b_ub, A_eq or None, b_eq or None)

    def faces(self):
        """All faces (including self and the zero cone)."""
        out = {self.generators: self}
        ineqs, eqs = self.hrep()
        for a in ineqs:
            sub = [g for g in self.generators if dot(a, g) == 0]
            f = Cone(sub) if sub else Cone.zero(self.dim)
            if f.generators not in out:
                out[f.generators] = f
                for sf in f.faces():
                    out.setdefault(sf.generators, sf)
        out.setdefault((), Cone.zero(self.dim))
        return list(out.values())

    def facets(self):
        k = self.rank
        return [f for f in self.faces() if f.rank == k - 1]

    def is_smooth(self):
        """Generators extend to a Z-basis."""
        gens = self.generators
        if not gens:
            return True
        k = self.rank
        if len(gens) != k:
            return False
        from math import gcd

        g = 0
        for sub in itertools.combinations(range(self.dim), k):
            minor = det([[gens[i][j] for j in sub] for i in range(k)])
            g = gcd(g, abs(int(minor)))
        return g == 1


def _in_cone_span(x, gens):
    d = len(x)
    A_eq = [[g[i] for g in gens] for i in range(d)]
    return lp.feasible_nonneg(A_eq, list(x))


class Fan:
    """Fan given by its maximal cones; pairwise face condition validated."""

    def __init__(self, dim, cones, validate=True):
        self.dim = dim
        cs = []
        for c in cones:
            if not isinstance(c, Cone):
                c = Cone(c)
            if c.dim != dim:
                raise ValueError("cone in wrong ambient dimension")
            cs.append(c)
        # Drop cones that are faces of others; keep one copy each.
        maximal = []
        for c in cs:
            if any(o is not c and o.contains_cone(c) and o.generators != c.generators for o in cs):
                continue
            if c.generators not in [m.generators for m in maximal]:
                maximal.append(c)
        self.cones = tuple(maximal)
        if validate:
            self._validate()

    def _validate(self):
        for c1, c2 in itertools.combinations(self.cones, 2):
            inter = c1.intersect(c2)
            if not (inter.is_face_of(c1) and inter.is_face_of(c2)):
                raise ValueError(f"cones {c1} and {c2} do not meet in a common face")

    def __eq__(self, other):
        return (
            isinstance(other, Fan)
            and other.dim == self.dim
            and sorted(c.generators for c in other.cones) == sorted(c.generators for c in self.cones)
        )

    def __repr__(self):
        return f"Fan(dim={self.dim}, {len(self.cones)} maximal cones)"

    def rays(self):
        out = []
        for c in self.cones:
            for g in c.generators:
                if g not in out:
                    out.append(g)
        return sorted(out)

    def all_faces(self):
        out = {}
        for c in self.cones:
            for f in c.faces():
                out.setdefault(f.generators, f)
        return list(out.values())

    def find_cone(self, x):
        for c in self.cones:
            if c.contains(x):
                return c
        return None

    def refines(self, other):
        return all(
            any(o.contains_cone(c) for o in other.cones) for c in self.cones
        )


# -- predicates -------------------------------------------------------------


def is_smooth(f):
    return all(c.is_smooth() for c in f.cones)


def _wall_criterion(f, boundary_ok=None):
    if not f.cones:
        return False
    if any(c.rank < f.dim for c in f.cones):
        return False
    for c in f.cones:
        for w in c.facets():
            count = sum(1 for o in f.cones if w.is_face_of(o))
            if boundary_ok is not None and boundary_ok(w):
                if count != 1:
                    return False
            elif count != 2:
                return False
    return True


def is_complete(f):
    """|Sigma| = N_R, via the wall criterion (dim <= 3)."""
    if f.dim > 3:
        raise DimensionTooHigh("completeness check limited to dim <= 3")
    return _wall_criterion(f)


def is_complete_halfspace(f):
    """|Sigma| = N_R x R>=0: walls inside {t = 0} belong to one cone only."""
    if f.dim > 3:
        raise DimensionTooHigh("completeness check limited to dim <= 3")
    return _wall_criterion(f, boundary_ok=lambda w: all(g[-1] == 0 for g in w.generators))


def is_projective(f, support="complete"):
    """Full support + a strictly concave support function (LP feasibility)."""
    complete = is_complete_halfspace(f) if support == "halfspace" else is_complete(f)
    if not complete:
        raise NotComplete("projectivity asks for a fan with full support")
    n = len(f.cones)
    d = f.dim
    if n == 1:
        return True
    # Variables: m_sigma for each maximal cone; constraints tie values on
    # shared rays and impose unit concavity slack across other cones' rays.
    A_ub, b_ub, A_eq, b_eq = [], [], [], []

    def var(i, j):
        return i * d + j

    nv = n * d
    for i, ci in enumerate(f.cones):
        for j, cj in enumerate(f.cones):
            if i == j:
                continue
            shared = set(ci.generators) & set(cj.generators)
            for g in shared:
                row = [ZERO] * nv
                for t in range(d):
                    row[var(i, t)] += g[t]
                    row[var(j, t)] -= g[t]
                A_eq.append(row)
                b_eq.append(ZERO)
            for g in ci.generators:
                if g in shared:
                    continue
                # strict concavity: <m_j, g> >= <m_i, g> + 1
                row = [ZERO] * nv
                for t in range(d):
                    row[var(i, t)] += g[t]
                    row[var(j, t)] -= g[t]
                A_ub.append(row)
                b_ub.append(-ONE)
    return lp.feasible(A_ub or None, b_ub or None, A_eq or None, b_eq or None)


def common_refinement(a, b):
    if a.dim != b.dim:
        raise SupportMismatch("ambient dimensions differ")
    pieces = []
    for ca in a.cones:
        for cb in b.cones:
            inter = ca.intersect(cb)
            if inter.generators:
                pieces.append(inter)
    result = Fan(a.dim, pieces, validate=False)
    # Support equality: each input cone must be covered by the pieces.
    if a.dim <= 3:
        for ca in a.cones:
            if not _covered(ca, [p for p in result.cones if ca.contains_cone(p)]):
                raise SupportMismatch("supports differ (cone of the first fan not covered)")
        for cb in b.cones:
            if not _covered(cb, [p for p in result.cones if cb.contains_cone(p)]):
                raise SupportMismatch("supports differ (cone of the second fan not covered)")
    return result


def _covered(cone, pieces):
    """Do the pieces (subcones of cone) cover it?  Wall-counting criterion."""
    k = cone.rank
    full = [p for p in pieces if p.rank == k]
    if not full:
        return False
    if k == 1:
        return True
    boundary = cone.facets()
    for p in full:
        for w in p.facets():
            on_boundary = any(f.contains_cone(w) for f in boundary)
            shared = sum(1 for q in full if w.is_face_of(q))
            if on_boundary:
                if shared != 1:
                    return False
            elif shared != 2:
                return False
    return True


def canonical_extension(f):
    """Cones sigma x {0} plus cone(sigma x {0}, (0,..,0,1)) for sigma in f."""
    d = f.dim
    up = tuple(ZERO for _ in range(d)) + (ONE,)
    cones = []
    for c in f.cones:
        lifted = [g + (ZERO,) for g in c.generators]
        cones.append(Cone(lifted + [up]))
        cones.append(Cone(lifted) if lifted else Cone.zero(d + 1))
    if not f.cones:
        cones.append(Cone([up]))
    return Fan(d + 1, [c for c in cones if c.generators], validate=False)


def smooth_refinement_2d(f):
    """Resolve every singular 2D cone by inserting interior lattice rays."""
    if f.dim != 2:
        raise DimensionTooHigh("smooth refinement implemented for dim 2 only")
    out = []
    for c in f.cones:
        out.extend(_resolve_2d(c))
    return Fan(2, out, validate=False)


def _resolve_2d(cone):
    if cone.is_smooth() or cone.rank < 2:
        return [cone]
    u, v = cone.generators
    w = _hull_point_2d(u, v)
    return _resolve_2d(Cone([u, w])) + _resolve_2d(Cone([w, v]))


def _hull_point_2d(u, v):
    """A primitive lattice point in cone(u, v) with |det(u, w)| = 1."""
    D = abs(det([list(u), list(v)]))
    best = None
    # Lattice points in the fundamental parallelogram {a u + b v : 0<=a,b<=1}.
    xs = sorted({u[0] * a + v[0] * b for a in (0, 1) for b in (0, 1)})
    ys = sorted({u[1] * a + v[1] * b for a in (0, 1) for b in (0, 1)})
    M = [[u[0], v[0]], [u[1], v[1]]]
    for x in range(int(xs[0]), int(xs[-1]) + 1):
        for y in range(int(ys[0]), int(ys[-1]) + 1):
            sol = solve([[Fraction(u[0]), Fraction(v[0])], [Fraction(u[1]), Fraction(v[1])]], [Fraction(x), Fraction(y)])
            if sol is None:
                continue
            a, b = sol
            if not (0 <= a <= 1 and 0 <= b <= 1):
                continue
            w = (x, y)
            if w == (0, 0) or primitive(w) in (u, v):
                continue
            w = primitive(w)
            du = abs(det([list(u), list(w)]))
            dv = abs(det([list(w), list(v)]))
            if du == 0 or dv == 0:
                continue
            key = (du, dv)
            if best is None or key < best[0]:
                best = (key, w)
    if best is None:
        raise RuntimeError("no interior lattice point found (cone not singular?)")
    return best[1]


# -- support functions and divisors -----------------------------------------


@dataclass
class SupportFunction:
    """Conical function linear on each maximal cone of a fan."""

    fan: Fan
    functionals: tuple  # m_sigma per maximal cone, aligned with fan.cones

    def __post_init__(self):
        for c1, m1 in zip(self.fan.cones, self.functionals):
            for c2, m2 in zip(self.fan.cones, self.functionals):
                shared = set(c1.generators) & set(c2.generators)
                for g in shared:
                    if dot(m1, g) != dot(m2, g):
                        raise ValueError("functionals disagree on a shared ray")

    def value(self, x):
        x = qvec(x)
        c = self.fan.find_cone(x)
        if c is None:
            raise ValueError("point outside the fan support")
        m = self.functionals[self.fan.cones.index(c)]
        return dot(m, x)

    def as_pa(self):
        """As a min of linear pieces; valid when the function is concave."""
        return PAConcave(self.fan.dim, [(m, ZERO) for m in self.functionals])


@dataclass
class ToricDivisorData:
    """Weil data: coefficients at horizontal rays and at vertical rays per prime."""

    horizontal: dict  # ray generator (tuple) -> Fraction
    vertical: dict = field(default_factory=dict)  # (prime, vertical ray) -> Fraction


def support_from_divisor(f, divisor, prime=None):
    """Unique support function with Psi(v_rho) = -a_rho on a smooth fan.

    With a prime argument, returns the level-1 piecewise-affine function
    gamma_p = Psi - b_p as a PAConcave-style list (concavity not assumed:
    the PAConcave constructor will reject non-concave-describable data only
    implicitly, so callers needing generality keep the SupportFunction).
    """
    if not is_smooth(f):
        raise NotSmooth("divisor dictionary needs a smooth fan")
    functionals = []
    for c in f.cones:
        gens = c.generators
        if not gens:
            functionals.append(tuple(ZERO for _ in range(f.dim)))
            continue
        A = [list(g) for g in gens]
        b = [-divisor.horizontal.get(g, ZERO) for g in gens]
        sol = solve_affine(A, b)
        if sol is None:
            raise ValueError("inconsistent ray values on a cone")
        functionals.append(sol[0])
    sf = SupportFunction(f, tuple(functionals))
    if prime is None:
        return sf
    b_p = ZERO
    up = tuple(ZERO for _ in range(f.dim)) + (ONE,)
    for (p, ray), coeff in divisor.vertical.items():
        if p == prime and ray == up:
            b_p = coeff
    return PAConcave(f.dim, [(m, -b_p) for m in sf.functionals])


def divisor_from_support(sf):
    horizontal = {}
    for c, m in zip(sf.fan.cones, sf.functionals):
        for g in c.generators:
            horizontal[g] = -dot(m, g)
    return ToricDivisorData(horizontal)


def is_effective(gammas):
    """Are all per-place tropical Green's functions <= 0 everywhere?"""
    for gamma in gammas:
        if isinstance(gamma, SupportFunction):
            for c, m in zip(gamma.fan.cones, gamma.functionals):
                if any(dot(m, g) > 0 for g in c.generators):
                    return False
        elif isinstance(gamma, PAConcave):
            status, value, _ = lp.max_min_affine(gamma.pieces, gamma.dim)
            if status == lp.UNBOUNDED or (status == lp.OPTIMAL and value > 0):
                return False
        else:
            raise TypeError("expected SupportFunction or PAConcave")
    return True


def is_relatively_nef(sf):
    """Concavity of a support function: <m_sigma, v> >= Psi(v) at all rays."""
    pieces = sf.functionals if isinstance(sf, SupportFunction) else None
    if pieces is None:
        raise TypeError("expected a SupportFunction")
    rays = sf.fan.rays()
    for c, m in zip(sf.fan.cones, sf.functionals):
        for v in rays:
            own = sf.fan.find_cone(v)
            val = dot(sf.functionals[sf.fan.cones.index(own)], v)
            if dot(m, v) < val:
                return False
    return True


def is_ample(sf):
    """Strict concavity across cones (fan must be complete)."""
    if not is_complete(sf.fan):
        raise NotComplete("ampleness asks for a complete fan")
    if not is_relatively_nef(sf):
        return False
    for c, m in zip(sf.fan.cones, sf.functionals):
        for v in sf.fan.rays():
            if c.contains(v):
                continue
            own = sf.fan.find_cone(v)
            val = dot(sf.functionals[sf.fan.cones.index(own)], v)
            if dot(m, v) == val:
                return False
    return True


def normal_fan(polytope):
    """Fan of linearity cones of y -> min over vertices of <v, y> (dim <= 3)."""
    from .polytopes import Polytope

    if not isinstance(polytope, Polytope):
        raise TypeError("normal_fan needs a polytope")
    d = polytope.dim
    verts = polytope.vertices
    if len(verts) == 1:
        return Fan(d, [], validate=False)
    cones = []
    for v in verts:
        rows = [vsub(v, u) for u in verts if u != v]  # (v - u) . x <= 0
        rays = _cone_rays_from_ineqs(rows, d)
        if rays:
            cones.append(Cone(rays))
    return Fan(d, cones, validate=False)


def _cone_rays_from_ineqs(rows, dim):
    rays = []
    if dim == 1:
        for r in ((ONE,), (-ONE,)):
            if all(dot(a, r) <= 0 for a in rows):
                rays.append(primitive(r))
    else:
        for sub in itertools.combinations(range(len(rows)), dim - 1):
            ns = nullspace([list(rows[i]) for i in sub])
            if len(ns) != 1:
                continue
            for r in (ns[0], tuple(-x for x in ns[0])):
                if all(dot(a, r) <= 0 for a in rows):
                    rp = primitive(r)
                    if rp not in rays:
                        rays.append(rp)
    return rays


# -- arithmetic fans ---------------------------------------------------------


@dataclass
class ArithmeticFan:
    base: Fan  # Sigma in N_R
    exceptional: dict = field(default_factory=dict)  # prime label -> Fan in N_R x R>=0

    @property
    def dim(self):
        return self.base.dim

    def fan_at(self, prime):
        return self.exceptional.get(prime, canonical_extension(self.base))

    @property
    def primes(self):
        return sorted(self.exceptional, key=str)


def level_zero_slice(tilde):
    """Fan obtained by slicing a fan in N_R x R>=0 at level 0."""
    d = tilde.dim - 1
    cones = []
    for c in tilde.cones:
        flat = [g[:-1] for g in c.generators if g[-1] == 0]
        if flat:
            cones.append(Cone(flat))
    if not cones:
        return Fan(d, [], validate=False)
    return Fan(d, cones, validate=False)


@dataclass
class CheckItem:
    name: str
    passed: bool
    mode: str = "exact"
    detail: str = ""


def validate_arithmetic_fan(af):
    """Check the defining conditions; effectivity is reported as a sufficient
    condition only (refining the canonical extension), otherwise 'unknown'."""
    items = []
    d = af.dim
    up = tuple(ZERO for _ in range(d)) + (ONE,)
    ok_slice = True
    details = []
    for p in af.primes:
        tilde = af.exceptional[p]
        if tilde.dim != d + 1:
            ok_slice = False
            details.append(f"{p}: wrong ambient dimension")
            continue
        if any(g[-1] < 0 for c in tilde.cones for g in c.generators):
            ok_slice = False
            details.append(f"{p}: cone below level 0")
            continue
        if level_zero_slice(tilde) != af.base:
            ok_slice = False
            details.append(f"{p}: level-0 slice differs from the base fan")
    items.append(CheckItem("level-0 slices equal the base fan", ok_slice, detail="; ".join(details)))
    items.append(CheckItem("finitely many exceptional primes", True, detail=f"{len(af.primes)} listed"))
    if d <= 2:
        try:
            proj = is_projective(af.base) if af.base.cones else False
        except (NotComplete, DimensionTooHigh):
            proj = False
        items.append(CheckItem("base fan projective", proj))
        ok = True
        for p in af.primes:
            try:
                if not is_projective(af.exceptional[p], support="halfspace"):
                    ok = False
            except (NotComplete, DimensionTooHigh):
                ok = False
        items.append(CheckItem("exceptional fans projective", ok))
    else:
        items.append(CheckItem("projectivity checks", True, mode="skipped", detail="dim > 2"))
    can = canonical_extension(af.base)
    refines_canonical = all(af.exceptional[p].refines(can) for p in af.primes)
    items.append(
        CheckItem(
            "effective",
            refines_canonical,
            mode="sufficient" if refines_canonical else "unknown",
            detail="refines the canonical extension" if refines_canonical else "no certificate; undecided",
        )
    )
    return items


def validate_fan_morphism(phi, src, dst):
    """phi: dict prime -> (d2+1)x(d1+1) integer matrix (common map implied).

    Returns CheckItems for the defining conditions plus refinement detection.
    """
    items = []
    d1, d2 = src.dim, dst.dim

    def apply(M, v):
        return tuple(sum(Fraction(M[i][j]) * v[j] for j in range(len(v))) for i in range(len(M)))

    primes = sorted(set(src.primes) | set(dst.primes) | set(phi), key=str)
    ok_compat = True
    detail = []
    for p in primes:
        M = phi.get(p)
        if M is None:
            ok_compat = False
            detail.append(f"{p}: no matrix")
            continue
        fsrc, fdst = src.fan_at(p), dst.fan_at(p)
        for c in fsrc.cones:
            img = [apply(M, g) for g in c.generators]
            if not any(all(o.contains(v) for v in img) for o in fdst.cones):
                ok_compat = False
                detail.append(f"{p}: image of {c} in no target cone")
    items.append(CheckItem("per-prime cone compatibility", ok_compat, detail="; ".join(detail[:3])))

    mats = [phi[p] for p in phi]
    common = None
    ok_common = True
    for M in mats:
        top = tuple(tuple(M[i][j] for j in range(d1)) for i in range(d2))
        bottom = tuple(M[d2][j] for j in range(d1))
        if any(x != 0 for x in bottom):
            ok_common = False
        if common is None:
            common = top
        elif top != common:
            ok_common = False
    items.append(
        CheckItem(
            "common level-0 restriction",
            ok_common,
            detail="all matrices restrict to one map on N x {0}",
        )
    )
    known = set(src.primes) | set(dst.primes)
    ok_can = all(
        tuple(M[i][d1] for i in range(d2 + 1)) == tuple(0 for _ in range(d2)) + (1,)
        for p, M in phi.items()
        if p not in known
    )
    items.append(CheckItem("canonical extension off a finite set", ok_can))
    identity = all(
        all(M[i][j] == (1 if i == j else 0) for i in range(d2 + 1) for j in range(d1 + 1))
        for M in mats
    ) and d1 == d2
    if identity:
        refine = all(src.fan_at(p).refines(dst.fan_at(p)) for p in primes)
        items.append(CheckItem("refinement", refine, detail="identity maps; cone containment checked"))
    return items


def weil_decomposition(af, gammas):
    """Split level-1 data into horizontal and vertical Weil coefficients.

    gammas: dict prime -> PAConcave (the level-1 function gamma_p on the
    prime's fan); unlisted primes are canonical (gamma = Psi).  Horizontal
    coefficients come from the common recession function, vertical ones from
    evaluating the homogenization at the vertical rays.
    """
    for p in af.primes:
        if not is_smooth(af.exceptional[p]):
            raise NotSmooth("weil decomposition needs smooth fans")
    if not is_smooth(af.base):
        raise NotSmooth("weil decomposition needs a smooth base fan")
    rec = None
    for p, g in gammas.items():
        r = g.recession()
        if rec is None:
            rec = r
        elif rec != r:
            raise ValueError("level-1 functions have different recessions")
    if rec is None:
        rec = PAConcave(af.dim, [(tuple(ZERO for _ in range(af.dim)), ZERO)])
    horizontal = {v: -rec.eval(v) for v in af.base.rays()}
    vertical = {}
    for p in sorted(set(af.primes) | set(gammas), key=str):
        g = gammas.get(p)
        tilde = af.fan_at(p)
        for ray in tilde.rays():
            if ray[-1] == 0:
                continue
            if g is None:
                val = rec.eval(ray[:-1])  # canonical: Phi(x, t) = Psi(x)
            else:
                # homogenization: Phi(x, t) = t * gamma(x / t) for t > 0
                t = ray[-1]
                val = t * g.eval(tuple(Fraction(x, 1) / t for x in ray[:-1]))
            if -val != 0:
                vertical[(p, ray)] = -val
    return ToricDivisorData(horizontal, vertical)
