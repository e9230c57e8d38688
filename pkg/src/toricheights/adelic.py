"""Adelic divisor data model and positivity certificates.

A divisor is a place-indexed family of roofs on a common compact convex set:
finitely many explicit roofs, a default (normally the indicator of the
domain) for the remaining finite places, and optionally an infinite family
along an enumeration of places.  Positivity is certified through the roof
criteria: rational sups, common domain closure, and the eps-collar condition
checked with l-infinity balls on the piecewise-affine side.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .concave import (
    MINUS_INF,
    IndicatorRoof,
    PAConcave,
    PARoof,
    Roof,
    UnsupportedCombination,
    indicator,
    sup_convolution,
    sup_ratio,
)
from .families import RoofFamily
from .polytopes import Ball, ConvexBody, Polytope
from .qlinalg import ZERO, qvec


class PointOutsideDomain(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Place:
    """A place of the base field; kind 'infinite' or 'finite', opaque label."""

    kind: str
    label: str
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("infinite", "finite"):
            raise ValueError("place kind must be 'infinite' or 'finite'")
        if not 0 < self.weight <= 1:
            raise ValueError("place weight must lie in (0, 1]")

    @classmethod
    def infinite(cls, label="oo", weight=1):
        return cls("infinite", str(label), Fraction(weight))

    @classmethod
    def finite(cls, label, weight=1):
        return cls("finite", str(label), Fraction(weight))

    def sort_key(self):
        return (0 if self.kind == "infinite" else 1, self.label)


@dataclass
class RoofValue:
    """Value of a (possibly truncated) roof series at a point."""

    value: object  # Fraction | float | MINUS_INF
    abs_error: float = 0.0
    exact: bool = True

    @property
    def is_minus_inf(self):
        return self.value == MINUS_INF

    def certified_sign(self):
        """+1 / -1 when the sign is certified, else 0."""
        if self.is_minus_inf:
            return -1
        lo = float(self.value) - self.abs_error
        hi = float(self.value) + self.abs_error
        if lo >= 0 and float(self.value) >= 0 and (self.exact or lo >= 0):
            return 1
        if hi < 0:
            return -1
        return 0


@dataclass
class AdelicDivisor:
    dim: int
    domain: ConvexBody
    explicit: dict = field(default_factory=dict)  # Place -> Roof
    default: Roof = None
    S: frozenset = frozenset()  # finite-place labels removed from the base
    family: RoofFamily = None
    family_weight: Fraction = Fraction(1)
    name: str = ""

    def __post_init__(self):
        if self.default is None:
            self.default = indicator(self.domain)
        self.S = frozenset(str(s) for s in self.S)
        for place, roof in self.explicit.items():
            if roof.dim != self.dim:
                raise ValueError(f"roof at {place.label} has wrong dimension")

    def places(self):
        return sorted(self.explicit, key=Place.sort_key)

    def roof_at(self, place):
        return self.explicit.get(place, self.default)

    def family_terms(self):
        """Yields (index, roof) for the family part, indefinitely."""
        if self.family is None:
            return
        n = self.family.start
        while True:
            yield n, self.family.generator(n)
            n += 1


def global_roof_eval(divisor, y, series_budget=256, abs_tol=1e-12):
    """Value of the weighted roof sum at y; exact when the data allows.

    Family terms beyond the vanishing threshold of y contribute exactly 0.
    When no threshold exists (y too close to the relative boundary), the
    series is truncated: a declared value tail bound certifies the result,
    otherwise the value is heuristic and carries the last term as error bar.
    """
    y = qvec(y)
    if not divisor.domain.contains(y):
        raise PointOutsideDomain(f"{tuple(map(str, y))} is outside the domain")
    total = Fraction(0)
    err = 0.0
    exact = True
    for place in divisor.places():
        v = divisor.roof_at(place).eval(y)
        if v == MINUS_INF:
            return RoofValue(MINUS_INF)
        if isinstance(v, Fraction):
            total += place.weight * v
        else:
            total = float(total) + float(place.weight) * v
            exact = False
    fam = divisor.family
    if fam is not None:
        w = divisor.family_weight
        n = fam.start
        threshold = None
        while n <= fam.start + series_budget:
            region = fam.vanishing_region(n)
            if region is not None and region.contains(y) and fam.monotone_regions:
                threshold = n
                break
            v = fam.generator(n).eval(y)
            if v == MINUS_INF:
                return RoofValue(MINUS_INF)
            if isinstance(v, Fraction):
                if isinstance(total, Fraction):
                    total += w * v
                else:
                    total += float(w * v)
            else:
                total = float(total) + float(w) * v
                exact = False
            n += 1
        if threshold is None:
            bound = fam.value_tail_bound(fam.start + series_budget, y)
            if bound is None:
                last = abs(float(fam.generator(n - 1).eval(y)))
                return RoofValue(float(total), max(last, abs_tol), exact=False)
            if isinstance(bound, Fraction) and isinstance(total, Fraction):
                return RoofValue(total, float(bound), exact=True)
            return RoofValue(float(total), float(bound), exact=False)
    return RoofValue(total, err, exact=exact and isinstance(total, Fraction))


# -- semipositivity -----------------------------------------------------------


@dataclass
class ConditionReport:
    name: str
    passed: bool
    mode: str  # 'exact' | 'sampled' | 'declared'
    detail: str = ""


@dataclass
class Certificate:
    items: list
    eps_sets: dict = field(default_factory=dict)  # eps -> sorted labels of S(eps)

    @property
    def passed(self):
        return all(it.passed for it in self.items)

    def render(self):
        out = []
        for it in self.items:
            out.append(f"[{'pass' if it.passed else 'FAIL'}] ({it.mode}) {it.name}"
                       + (f": {it.detail}" if it.detail else ""))
        for eps, labels in self.eps_sets.items():
            out.append(f"  S({eps}) = {{{', '.join(labels) or ''}}}")
        return "\n".join(out)


def _roof_sup(roof):
    s = roof.sup()
    return s


def _domain_matches(roof, domain, samples=40):
    """Does the closure of the roof's effective domain equal `domain`?"""
    rd = roof.domain
    if isinstance(rd, Polytope) and isinstance(domain, Polytope):
        return rd == domain, "exact"
    if isinstance(rd, Ball) and isinstance(domain, Ball):
        return rd == domain, "exact"
    # Sampled check: finite well inside `domain`, -inf outside it.
    ok = roof.eval(domain.inner_point()) != MINUS_INF
    lo, hi = domain.bounding_box()
    rng = np.random.default_rng(11)
    pts = np.array([[float(x) for x in lo]]) + rng.random((samples, domain.dim)) * (
        np.array([[float(h) - float(l) for l, h in zip(lo, hi)]])
    )
    vals = roof.eval_batch(pts)
    for p, v in zip(pts, vals):
        frac = [Fraction(x).limit_denominator(10**9) for x in p]
        if not domain.contains(frac):
            if np.isfinite(v):
                ok = False
        elif not np.isfinite(v) and _deep_inside(domain, frac):
            ok = False
    return ok, "sampled"


def _deep_inside(domain, p):
    if isinstance(domain, Polytope):
        return domain.contains_interior(p)
    if isinstance(domain, Ball):
        d2 = sum((Fraction(x) - c) ** 2 for x, c in zip(p, domain.center))
        return d2 < (domain.radius * Fraction(99, 100)) ** 2
    return True


def _collar_ok(roof, domain, eps):
    """Check roof [+] iota_{B_inf(0, eps)} >= iota_domain (exact PA route)."""
    if isinstance(roof, PARoof) and isinstance(domain, Polytope):
        cube = Polytope.box((-eps,) * domain.dim, (eps,) * domain.dim)
        conv = sup_convolution(roof, indicator(cube))
        return all(conv.eval(v) >= 0 for v in domain.vertices), "exact"
    return None, "unsupported"


def check_semipositive(divisor, eps_schedule=(Fraction(1, 2), Fraction(1, 8))):
    """Certificate for membership in the semipositive cone."""
    items = []
    eps_sets = {}
    # (i) rational sup at explicit finite places.
    bad = []
    mode = "exact"
    for place in divisor.places():
        if place.kind != "finite":
            continue
        roof = divisor.roof_at(place)
        s = _roof_sup(roof)
        if s is None:
            bad.append(f"{place.label}: sup not certified (analytic roof)")
        elif not isinstance(s, Fraction):
            bad.append(f"{place.label}: sup irrational")
    if divisor.family is not None:
        mode = "declared"  # family sups are declared data
        if not isinstance(divisor.family.sup_value, Fraction):
            bad.append("family: declared sup not rational")
    items.append(
        ConditionReport(
            "sup of each finite-place roof is rational",
            not bad,
            mode,
            "; ".join(bad),
        )
    )
    # (ii) effective domains share one closure.
    bad = []
    mode = "exact"
    for place in divisor.places():
        ok, how = _domain_matches(divisor.roof_at(place), divisor.domain)
        if how == "sampled":
            mode = "sampled"
        if not ok:
            bad.append(place.label)
    ok, how = _domain_matches(divisor.default, divisor.domain)
    if not ok:
        bad.append("default")
    if divisor.family is not None:
        for n in (divisor.family.start, divisor.family.start + 3):
            ok, how = _domain_matches(divisor.family.generator(n), divisor.domain)
            if how == "sampled":
                mode = "sampled"
            if not ok:
                bad.append(f"family[{n}]")
    items.append(
        ConditionReport(
            "effective-domain closures all equal the divisor domain",
            not bad,
            mode,
            "; ".join(bad),
        )
    )
    # (iii) eps-collar condition with finite exceptional sets.
    default_sup = _roof_sup(divisor.default)
    default_ok = default_sup == 0
    for eps in eps_schedule:
        eps = Fraction(eps)
        labels = set(divisor.S)
        bad = []
        mode = "exact"
        for place in divisor.places():
            if place.kind != "finite":
                continue
            roof = divisor.roof_at(place)
            s = _roof_sup(roof)
            if s != 0:
                labels.add(place.label)
                continue
            ok, how = _collar_ok(roof, _as_polytope(divisor.domain), eps)
            if ok is None:
                mode = "sampled"
                ok = _collar_sampled(roof, divisor.domain, eps)
            if not ok:
                labels.add(place.label)
        if divisor.family is not None:
            n_eps = _family_threshold(divisor.family, divisor.domain, eps)
            if n_eps is None:
                bad.append("family: no vanishing threshold for this eps")
            else:
                labels.update(f"family[{k}]" for k in range(divisor.family.start, n_eps))
        if not default_ok:
            bad.append("default roof has nonzero sup")
        items.append(
            ConditionReport(
                f"eps-collar condition at eps = {eps}",
                not bad,
                mode,
                "; ".join(bad) or f"exceptional set size {len(labels)}",
            )
        )
        eps_sets[str(eps)] = sorted(labels)
    return Certificate(items, eps_sets)


def _as_polytope(body):
    return body if isinstance(body, Polytope) else None


def _collar_sampled(roof, domain, eps, samples=64):
    lo, hi = domain.bounding_box()
    rng = np.random.default_rng(5)
    pts = []
    while len(pts) < samples:
        cand = [
            Fraction(float(l) + rng.random() * (float(h) - float(l))).limit_denominator(512)
            for l, h in zip(lo, hi)
        ]
        if domain.contains(cand):
            pts.append(cand)
    ball = Ball((ZERO,) * domain.dim, eps)
    conv = sup_convolution(roof, IndicatorRoof(ball))
    vals = conv.eval_batch(np.array([[float(x) for x in p] for p in pts]))
    return bool((vals >= -1e-9).all())


def _family_threshold(family, domain, eps, budget=512):
    """Least n with domain ⊆ vanishing_region(n) ⊕ B(0, eps), if any."""
    for n in range(family.start, family.start + budget):
        region = family.vanishing_region(n)
        if region is None:
            return None
        if _within_collar(domain, region, eps):
            return max(n, family.start)
    return None


def _within_collar(domain, region, eps):
    if isinstance(domain, Polytope) and isinstance(region, Polytope):
        return all(region.distance_linf(v) <= eps for v in domain.vertices)
    if isinstance(domain, Ball) and isinstance(region, Ball):
        return domain.radius - region.radius <= eps
    return False


# -- nef check -----------------------------------------------------------------


@dataclass
class NefVerdict:
    verdict: str  # 'Nef' | 'NotNef' | 'NumericallyNef' | 'NumericallyNotNef'
    witness: tuple = None
    detail: str = ""


def check_nef(divisor, grid=24):
    """Is the global roof nonnegative on the domain?

    Exact for piecewise-affine data (concavity puts the minimum at extreme
    points of the domain; family tails are certified by their declared value
    bounds).  Analytic data falls back to a sampled verdict.
    """
    dom = divisor.domain
    exact_candidates = isinstance(dom, Polytope)
    sampled = False
    worst = None
    points = []
    if isinstance(dom, Polytope):
        points.extend(dom.vertices)
    else:
        sampled = True
        lo, hi = dom.bounding_box()
        rng = np.random.default_rng(17)
        while len(points) < grid:
            cand = [
                Fraction(float(l) + rng.random() * (float(h) - float(l))).limit_denominator(4096)
                for l, h in zip(lo, hi)
            ]
            if dom.contains(cand):
                points.append(tuple(cand))
        if isinstance(dom, Ball):
            # boundary probes, where singular roofs live
            for k in range(grid):
                ang = 2 * math.pi * k / grid
                p = tuple(
                    Fraction(float(c) + float(dom.radius) * f).limit_denominator(10**6)
                    for c, f in zip(dom.center, (math.cos(ang), math.sin(ang)))
                )
                if dom.contains(p):
                    points.append(p)
    for p in points:
        rv = global_roof_eval(divisor, p)
        if rv.is_minus_inf:
            return NefVerdict("NotNef", tuple(map(str, p)), "global roof is -infinity")
        if not rv.exact:
            sampled = True
        sign = rv.certified_sign()
        if sign < 0:
            verdict = "NotNef" if rv.exact else "NumericallyNotNef"
            return NefVerdict(verdict, tuple(map(str, p)), f"value {float(rv.value):.6g}")
        if sign == 0:
            sampled = True
        if worst is None or float(rv.value) < worst:
            worst = float(rv.value)
    # interior spot checks for analytic roofs (concavity is assumed, but a
    # sampled verdict should not rest on vertices alone)
    if any(not divisor.roof_at(p).is_exact for p in divisor.places()):
        sampled = True
        lo, hi = dom.bounding_box()
        rng = np.random.default_rng(23)
        probes = []
        while len(probes) < grid:
            cand = [
                Fraction(float(l) + rng.random() * (float(h) - float(l))).limit_denominator(4096)
                for l, h in zip(lo, hi)
            ]
            if dom.contains(cand):
                probes.append(cand)
        for p in probes:
            rv = global_roof_eval(divisor, p)
            if rv.is_minus_inf or rv.certified_sign() < 0:
                return NefVerdict(
                    "NumericallyNotNef", tuple(map(str, p)), "negative sample value"
                )
    if sampled:
        return NefVerdict("NumericallyNef", detail=f"min sampled value {worst:.6g}")
    return NefVerdict("Nef", detail=f"min vertex value {worst:.6g}")


# -- standard boundary divisor -------------------------------------------------


def projective_space_fan(d):
    from .fans import Cone, Fan

    basis = [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    e0 = tuple(-1 for _ in range(d))
    gens = basis + [e0]
    cones = []
    for drop in range(d + 1):
        sub = [g for i, g in enumerate(gens) if i != drop]
        cones.append(Cone(sub))
    return Fan(d, cones)


@dataclass
class BoundaryDivisor:
    """The standard toric boundary divisor: support function, polytope, and
    both presentations (tropical Green's functions and roofs)."""

    dim: int
    S: frozenset
    psi: PAConcave  # Psi_B
    polytope: Polytope  # Delta_B = stab(Psi_B)
    divisor: AdelicDivisor

    def greens_function(self, place):
        if place.kind == "infinite" or place.label in self.S:
            return self.psi.add_constant(-1)
        return self.psi


def standard_boundary_divisor(d, S=()):
    """Coordinate-hyperplane boundary divisor on the projective d-space fan."""
    from .fans import ToricDivisorData, support_from_divisor

    fan = projective_space_fan(d)
    data = ToricDivisorData({v: Fraction(1) for v in fan.rays()})
    sf = support_from_divisor(fan, data)
    psi = sf.as_pa()
    delta = psi.stability_set()
    S = frozenset(str(s) for s in S)
    roof_plus = indicator(delta).add_constant(1)
    explicit = {Place.infinite(): roof_plus}
    for label in sorted(S):
        explicit[Place.finite(label)] = roof_plus
    div = AdelicDivisor(
        dim=d,
        domain=delta,
        explicit=explicit,
        S=S,
        name=f"standard boundary divisor (d={d})",
    )
    return BoundaryDivisor(d, S, psi, delta, div)


@dataclass
class ModelGreens:
    """Tropical Green's function data of a toric model divisor: the common
    recession Psi plus finitely many per-place overrides."""

    dim: int
    psi: PAConcave
    overrides: dict = field(default_factory=dict)  # Place -> PAConcave

    def at(self, place):
        return self.overrides.get(place, self.psi)


def boundary_norm(model, boundary):
    """Smallest eps with -eps*gamma_B <= gamma_D <= eps*gamma_B per place.

    Exact via linear-fractional maximization over the common linearity
    complex; returns a Fraction, or None for +infinity (the divisor has a
    component meeting the torus: a place with gamma(0) != 0 off S, or a
    recession mismatch off the boundary support).
    """
    worst = Fraction(0)
    places = set(model.overrides)
    gamma_b_generic = boundary.psi
    gamma_b_special = boundary.psi.add_constant(-1)
    # generic places: gamma_D = psi vs gamma_B = psi_B
    pairs = [(model.psi, gamma_b_generic)]
    for place in places:
        gd = model.at(place)
        if place.kind == "infinite" or place.label in boundary.S:
            pairs.append((gd, gamma_b_special))
        else:
            pairs.append((gd, gamma_b_generic))
    for gd, gb in pairs:
        if all(c == 0 for _, c in gd.pieces) and all(m == (ZERO,) * gd.dim for m, _ in gd.pieces):
            continue  # identically zero
        r = sup_ratio(gd, gb)
        if r is None:
            return None
        worst = max(worst, r)
    return worst


# -- divisor arithmetic --------------------------------------------------------


def add(d1, d2):
    """Sum of adelic divisors: domains add, roofs sup-convolve per place."""
    if d1.dim != d2.dim:
        raise UnsupportedCombination("dimensions differ")
    if d1.family is not None and d2.family is not None:
        raise UnsupportedCombination("cannot add two divisors with infinite families")
    if d2.family is not None:
        d1, d2 = d2, d1
    dom = _body_sum(d1.domain, d2.domain)
    places = sorted(set(d1.places()) | set(d2.places()), key=Place.sort_key)
    explicit = {}
    for place in places:
        explicit[place] = sup_convolution(d1.roof_at(place), d2.roof_at(place))
    family = None
    if d1.family is not None:
        family = _ShiftedFamily(d1.family, d2.domain, d2.default)
    return AdelicDivisor(
        dim=d1.dim,
        domain=dom,
        explicit=explicit,
        S=d1.S | d2.S,
        family=family,
        family_weight=d1.family_weight,
        name=f"({d1.name or 'D1'}) + ({d2.name or 'D2'})",
    )


def _body_sum(a, b):
    if isinstance(a, Polytope) and isinstance(b, Polytope):
        return a.minkowski_sum(b)
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(tuple(x + y for x, y in zip(a.center, b.center)), a.radius + b.radius)
    from .concave import _domain_sum

    return _domain_sum(a, b)


class _ShiftedFamily(RoofFamily):
    """Family [+] a fixed indicator: generators convolve, regions translate."""

    def __init__(self, base, other_domain, other_default):
        self.base = base
        self.other_domain = other_domain
        self.other_default = other_default
        self.start = base.start
        self.name = base.name + " (+) indicator"
        self.sup_value = base.sup_value
        self.monotone_regions = base.monotone_regions

    def generator(self, n):
        return sup_convolution(self.base.generator(n), self.other_default)

    def vanishing_region(self, n):
        region = self.base.vanishing_region(n)
        if region is None:
            return None
        if isinstance(region, Polytope) and isinstance(self.other_domain, Polytope):
            return region.minkowski_sum(self.other_domain)
        return None

    def tail_bound(self, N):
        return None  # not derivable in general; callers fall back to heuristics

    def value_tail_bound(self, N, y):
        return None


def regularize(divisor, eps):
    """Collar-smooth the divisor: roofs become theta [+] iota_{eps Delta_B}
    (plus eps at the archimedean place and places in S), restricted back to
    the original domain.  Output dominates the input pointwise and has a
    bounded-below global roof."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    bnd = standard_boundary_divisor(divisor.dim, divisor.S)
    collar = bnd.polytope.scale(eps)
    iota_collar = indicator(collar)

    def smooth(roof, bump):
        conv = sup_convolution(roof, iota_collar)
        if bump:
            conv = conv.add_constant(eps)
        return _restrict_to(conv, divisor.domain)

    explicit = {}
    handled_inf = False
    for place in divisor.places():
        bump = place.kind == "infinite" or place.label in divisor.S
        handled_inf = handled_inf or place.kind == "infinite"
        explicit[place] = smooth(divisor.roof_at(place), bump)
    if not handled_inf:
        explicit[Place.infinite()] = smooth(divisor.default, True)
    family = None
    if divisor.family is not None:
        family = _RegularizedFamily(divisor.family, collar, divisor.domain)
    return AdelicDivisor(
        dim=divisor.dim,
        domain=divisor.domain,
        explicit=explicit,
        S=divisor.S,
        default=_restrict_to(sup_convolution(divisor.default, iota_collar), divisor.domain),
        family=family,
        family_weight=divisor.family_weight,
        name=f"regularize({divisor.name or 'D'}, {eps})",
    )


def _restrict_to(roof, body):
    if isinstance(roof, PARoof) and isinstance(body, Polytope):
        return roof.restrict(body)
    return roof.restrict(body)


class _RegularizedFamily(RoofFamily):
    def __init__(self, base, collar, domain):
        self.base = base
        self.collar = collar
        self.domain = domain
        self.start = base.start
        self.name = base.name + " (regularized)"
        self.sup_value = base.sup_value
        self.monotone_regions = base.monotone_regions

    def generator(self, n):
        conv = sup_convolution(self.base.generator(n), indicator(self.collar))
        return _restrict_to(conv, self.domain)

    def vanishing_region(self, n):
        region = self.base.vanishing_region(n)
        if region is None:
            return None
        return region  # the collar only enlarges the vanishing set

    def tail_bound(self, N):
        return self.base.tail_bound(N)

    def value_tail_bound(self, N, y):
        return self.base.value_tail_bound(N, y)
