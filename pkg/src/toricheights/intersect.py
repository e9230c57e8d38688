"""Integration of roofs and arithmetic intersection numbers.

The height of a semipositive divisor is (d+1)! times the integral of its
global roof function; mixed intersection numbers come from the signed
inclusion-exclusion of sup-convolution integrals over Minkowski sums.  Exact
rational paths are used whenever every operand is piecewise affine and the
dimension allows; otherwise the adaptive cutoff quadrature takes over.
"""

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .concave import (
    MINUS_INF,
    IndicatorRoof,
    PARoof,
    Roof,
    ScaledRoof,
    ShiftedRoof,
    UnsupportedCombination,
    indicator,
    sup_convolution,
)
from .polytopes import Ball, DimensionTooHigh, EmptyBody, Polytope
from .qlinalg import ZERO
from . import quadrature
from .quadrature import (
    CutoffOutcome,
    interval_cells,
    qmc_integrate,
    tet_cells,
    triangle_cells,
)


@dataclass
class IntegrationConfig:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_subdivisions: int = 200_000
    cutoff_base: float = 2.0
    max_doublings: int = 40
    stall_ratio: float = 0.9
    mc_samples: int = 65_536
    seed: int = 0
    series_budget: int = 400
    exact_only: bool = False

    def with_tol(self, tol):
        return replace(self, rel_tol=tol, abs_tol=min(self.abs_tol, tol / 10))


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class HeightValue:
    """Exact rational, float-with-error-bar, or minus infinity."""

    kind: str  # 'exact' | 'approx' | 'minus_inf'
    value: object = None  # Fraction | float | None
    abs_error: float = 0.0
    flags: tuple = ()
    breakdown: tuple = ()  # ((label, HeightValue), ...)
    trace: str = ""

    @classmethod
    def exact(cls, v, **kw):
        return cls("exact", Fraction(v), 0.0, **kw)

    @classmethod
    def approx(cls, v, err, **kw):
        return cls("approx", float(v), float(err), **kw)

    @classmethod
    def minus_inf(cls, **kw):
        return cls("minus_inf", **kw)

    @property
    def is_minus_inf(self):
        return self.kind == "minus_inf"

    def as_float(self):
        return MINUS_INF if self.is_minus_inf else float(self.value)

    def __add__(self, other):
        if self.is_minus_inf or other.is_minus_inf:
            flags = tuple(dict.fromkeys(self.flags + other.flags))
            tr = self.trace or other.trace
            return HeightValue.minus_inf(flags=flags, trace=tr)
        flags = tuple(dict.fromkeys(self.flags + other.flags))
        if self.kind == "exact" and other.kind == "exact":
            return HeightValue("exact", self.value + other.value, 0.0, flags)
        return HeightValue(
            "approx",
            float(self.value) + float(other.value),
            self.abs_error + other.abs_error,
            flags,
        )

    def scale(self, c):
        if self.is_minus_inf:
            if c > 0:
                return self
            raise ValueError("cannot scale -inf by a nonpositive factor")
        if self.kind == "exact":
            return HeightValue("exact", self.value * Fraction(c), 0.0, self.flags)
        return HeightValue(
            "approx", float(self.value) * float(c), self.abs_error * abs(float(c)), self.flags
        )

    def render(self):
        if self.is_minus_inf:
            return "-infinity"
        if self.kind == "exact":
            return f"{self.value} (exact)"
        return f"{self.value:.12g} +/- {self.abs_error:.2g}"


ZERO_HEIGHT = HeightValue.exact(0)


# -- exact integration --------------------------------------------------------


def integrate_exact(roof):
    """Exact integral of a piecewise-affine roof over its domain (dim <= 3)."""
    roof = _fold_exact(roof)
    if not isinstance(roof, PARoof):
        raise UnsupportedCombination("exact integration needs a piecewise-affine roof")
    if roof.dim > 3:
        raise DimensionTooHigh("exact integration limited to dim <= 3")
    dom = roof.domain
    if dom.intrinsic_dim < roof.dim:
        return Fraction(0)
    total = Fraction(0)
    for cell, local, (g, h) in roof.hull.cells:
        if cell.intrinsic_dim < roof.dim:
            continue
        for simplex in cell.triangulate():
            vol = Polytope(roof.dim, list(simplex), _trusted=True).volume()
            vals = [roof.hull.value(v) for v in simplex]
            total += vol * sum(vals, ZERO) / len(vals)
    return total


def _fold_exact(roof):
    """Normalize shifted/scaled wrappers of exact roofs into plain PARoofs."""
    if isinstance(roof, ShiftedRoof):
        base = _fold_exact(roof.base)
        if isinstance(base, PARoof):
            return base.add_constant(roof.shift)
        return roof
    if isinstance(roof, ScaledRoof):
        base = _fold_exact(roof.base)
        if isinstance(base, PARoof):
            return base.scale(roof.factor)
        return roof
    if isinstance(roof, IndicatorRoof) and isinstance(roof.body, Polytope):
        return indicator(roof.body)
    return roof


# -- numeric integration -------------------------------------------------------


def _base_cells(domain):
    """Float quadrature mesh plus the measure transform for the domain."""
    if domain.dim > 3:
        return "qmc", None
    if isinstance(domain, Polytope):
        k = domain.intrinsic_dim
        if k < domain.dim:
            return None  # measure zero
        if domain.dim == 1:
            (a,), (b,) = domain.bounding_box()
            return interval_cells(a, b), None
        if domain.dim == 2:
            return triangle_cells(domain.triangulate()), None
        if domain.dim == 3:
            return tet_cells(domain.triangulate()), None
        raise DimensionTooHigh("cell meshes limited to dim <= 3")
    if isinstance(domain, Ball):
        c = np.array([float(x) for x in domain.center])
        R = float(domain.radius)
        if domain.dim == 1:
            return interval_cells(c[0] - R, c[0] + R), None
        if domain.dim == 2:
            # polar box (r, phi); jacobian r
            cells = triangle_cells(
                [
                    [(0.0, 0.0), (R, 0.0), (R, 2 * math.pi)],
                    [(0.0, 0.0), (R, 2 * math.pi), (0.0, 2 * math.pi)],
                ]
            )

            def transform(pts):
                r = pts[:, 0]
                phi = pts[:, 1]
                xy = np.stack([c[0] + r * np.cos(phi), c[1] + r * np.sin(phi)], axis=1)
                return xy, r

            return cells, transform
        if domain.dim == 3:
            cells = tet_cells(
                _box_tets((0.0, 0.0, 0.0), (R, math.pi, 2 * math.pi))
            )

            def transform(pts):
                r, th, phi = pts[:, 0], pts[:, 1], pts[:, 2]
                xyz = np.stack(
                    [
                        c[0] + r * np.sin(th) * np.cos(phi),
                        c[1] + r * np.sin(th) * np.sin(phi),
                        c[2] + r * np.cos(th),
                    ],
                    axis=1,
                )
                return xyz, (r * r * np.sin(th))

            return cells, transform
        raise DimensionTooHigh("ball meshes limited to dim <= 3")
    return "qmc", None


def _box_tets(lo, hi):
    lo = np.array(lo)
    hi = np.array(hi)
    corners = [lo + (hi - lo) * np.array(bits) for bits in itertools.product((0, 1), repeat=3)]
    corners = np.array(corners)
    idx = [
        (0, 1, 3, 7),
        (0, 1, 5, 7),
        (0, 2, 3, 7),
        (0, 2, 6, 7),
        (0, 4, 5, 7),
        (0, 4, 6, 7),
    ]
    return [[corners[i] for i in t] for t in idx]


def integrate_numeric(roof, cfg=None):
    """Adaptive integral of a roof over its domain; HeightValue outcome."""
    cfg = cfg or IntegrationConfig()
    dom = roof.domain
    if isinstance(dom, EmptyBody):
        return ZERO_HEIGHT
    # Radial fast path: profile expression in r over a centered ball.
    profile = getattr(roof, "profile_in_radius", None)
    if profile is not None and isinstance(dom, Ball) and dom.dim in (2, 3):
        return _integrate_radial(roof, profile, dom, cfg)
    # A support hint restricts the mesh to where the integrand is nonzero,
    # which keeps narrow features visible to the initial rule.
    hint = getattr(roof, "support_hint", None)
    if hint is not None and isinstance(hint, Polytope):
        if hint.intrinsic_dim < hint.dim:
            return ZERO_HEIGHT
        dom = hint
    folded = _fold_exact(roof)
    if (
        isinstance(folded, PARoof)
        and isinstance(dom, Polytope)
        and dom.dim <= 3
        and dom.intrinsic_dim == dom.dim
    ):
        # Mesh along the envelope's linearity cells: the integrand is affine
        # on every quadrature cell, so the rules see no kinks at all.
        simplices = []
        for cell, _, _ in folded.hull.cells:
            if cell.intrinsic_dim == dom.dim:
                simplices.extend(cell.triangulate())
        if dom.dim == 1:
            cells = [c for s in simplices for c in interval_cells(s[0][0], s[1][0])]
        elif dom.dim == 2:
            cells = triangle_cells(simplices)
        else:
            cells = tet_cells(simplices)
        transform = None
        roof = folded
    else:
        made = _base_cells(dom)
        if made is None:
            return ZERO_HEIGHT
        cells, transform = made
        if cells == "qmc":
            vals = qmc_integrate(lambda p: roof.eval_batch(p), dom, cfg)
            return HeightValue.approx(vals[0], vals[1], flags=("qmc",))
        cells = _presplit(cells)
    if transform is None:
        f = roof.eval_batch
    else:

        def f(pts):
            xy, jac = transform(pts)
            vals = roof.eval_batch(xy)
            return np.where(np.isfinite(vals), vals * jac, vals * np.where(jac > 0, 1.0, 0.0))

    return _outcome_to_height(quadrature.integrate_with_cutoffs(f, cells, cfg))


def _presplit(cells, generations=4):
    """Uniformly refine the starting mesh so that moderately narrow features
    are seen by the rule before adaptivity takes over."""
    for _ in range(generations):
        nxt = []
        for c in cells:
            nxt.extend(c.split())
        cells = nxt
        if len(cells) >= 512:
            break
    return cells


def _integrate_radial(roof, profile, ball, cfg):
    R = float(ball.radius)
    dim = ball.dim
    surface = 2 * math.pi if dim == 2 else 4 * math.pi

    def f(pts):
        r = pts[:, 0]
        vals = profile(r)
        jac = r if dim == 2 else r * r
        return np.where(np.isfinite(vals), vals * surface * jac, vals)

    lo, hi = 0.0, R
    hint = getattr(roof, "radial_support", None)
    if hint is not None:
        lo, hi = max(lo, float(hint[0])), min(hi, float(hint[1]))
        if hi <= lo:
            return ZERO_HEIGHT
    cells = _presplit(interval_cells(lo, hi))
    return _outcome_to_height(quadrature.integrate_with_cutoffs(f, cells, cfg))


def _outcome_to_height(outcome: CutoffOutcome):
    if outcome.kind == "minus_inf":
        return HeightValue.minus_inf(trace=outcome.trace.render())
    flags = outcome.flags
    if outcome.kind == "budget":
        flags = tuple(dict.fromkeys(flags + ("budget-exceeded", "heuristic")))
    return HeightValue.approx(outcome.value, outcome.error, flags=flags, trace="")


def integrate(roof, cfg=None):
    """Exact when possible, else numeric."""
    cfg = cfg or IntegrationConfig()
    folded = _fold_exact(roof)
    if isinstance(folded, PARoof) and folded.dim <= 3:
        return HeightValue.exact(integrate_exact(folded))
    if cfg.exact_only:
        raise UnsupportedCombination("exact-only integration requested for a non-exact roof")
    return integrate_numeric(roof, cfg)


# -- mixed integrals -----------------------------------------------------------


def _fold_supconv(roofs):
    # Group equal roofs first: the k-fold sup-convolution of a roof with
    # itself is its k-scaling, which keeps analytic operands foldable.
    groups = []
    for r in roofs:
        for g in groups:
            if same_roof(g[0], r):
                g[1] += 1
                break
        else:
            groups.append([r, 1])
    reps = [r.scale(k) if k > 1 else r for r, k in groups]
    acc = reps[0]
    for r in reps[1:]:
        acc = sup_convolution(acc, r)
    return acc


def same_roof(a, b):
    """Structural equality of roofs (enables the k-fold scaling shortcut)."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, PARoof):
        return a.lifted == b.lifted
    if isinstance(a, IndicatorRoof):
        return a.body == b.body
    if isinstance(a, ShiftedRoof):
        return a.shift == b.shift and same_roof(a.base, b.base)
    if isinstance(a, ScaledRoof):
        return a.factor == b.factor and same_roof(a.base, b.base)
    from .concave import AnalyticRoof, RadialRoof

    if isinstance(a, (AnalyticRoof, RadialRoof)):
        return (
            a.domain == b.domain
            and len(a._ops) == len(b._ops)
            and (a._ops == b._ops).all()
            and (a._args == b._args).all()
        )
    return False


def mixed_integral(roofs, cfg=None):
    """Signed inclusion-exclusion of integrals of sup-convolutions.

    For inputs g_0..g_d (concave on compact convex sets), the term for a
    subset I has sign (-1)^(d+1-|I|) and integrand the sup-convolution of
    the g_i over the Minkowski sum of their domains.
    """
    cfg = cfg or IntegrationConfig()
    roofs = list(roofs)
    d = len(roofs) - 1
    total = ZERO_HEIGHT
    for size in range(1, d + 2):
        sign = (-1) ** (d + 1 - size)
        for subset in itertools.combinations(range(d + 1), size):
            chosen = [roofs[i] for i in subset]
            if all(same_roof(chosen[0], r) for r in chosen):
                conv = chosen[0].scale(size) if size > 1 else chosen[0]
            else:
                conv = _fold_supconv(chosen)
            term = integrate(conv, cfg)
            if term.is_minus_inf:
                # Some subset integrand left L^1: the inclusion-exclusion
                # formula does not apply and the number is declared -inf.
                return HeightValue.minus_inf(flags=("subset-diverged",), trace=term.trace)
            total = total + term.scale(sign)
    return total


# -- heights --------------------------------------------------------------------


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _series_sum(family, weight, cfg, integrand=integrate):
    """Sum weight * integral(generator(n)) with certified or flagged truncation."""
    total = ZERO_HEIGHT
    n = family.start
    small_streak = 0
    flags = ()
    while n < family.start + cfg.series_budget:
        term = integrand(family.generator(n), cfg).scale(weight)
        if term.is_minus_inf:
            return term
        total = total + term
        n += 1
        bound = family.tail_bound(n - 1)
        if bound is not None:
            if float(bound) <= cfg.abs_tol:
                # Certified geometric truncation: value is the partial sum,
                # error bar carries the declared tail.
                return HeightValue(
                    "approx" if float(bound) > 0 else total.kind,
                    float(total.value) if float(bound) > 0 else total.value,
                    total.abs_error + float(bound),
                    total.flags,
                )
        else:
            mag = abs(float(term.value)) if not term.is_minus_inf else math.inf
            small_streak = small_streak + 1 if mag <= cfg.abs_tol else 0
            if small_streak >= 3:
                return HeightValue(
                    "approx",
                    float(total.value),
                    total.abs_error + 10 * cfg.abs_tol,
                    tuple(dict.fromkeys(total.flags + ("heuristic-truncation",))),
                )
    bound = family.tail_bound(n - 1)
    extra = float(bound) if bound is not None else abs(float(total.value)) * 0.01 + cfg.abs_tol
    flags = ("heuristic-truncation",) if bound is None else ("series-budget",)
    return HeightValue(
        "approx" if total.kind != "minus_inf" else total.kind,
        float(total.value),
        total.abs_error + extra,
        tuple(dict.fromkeys(total.flags + flags)),
    )


def self_intersection(divisor, cfg=None):
    """(d+1)! times the weighted sum of per-place roof integrals."""
    from .adelic import global_roof_eval

    cfg = cfg or IntegrationConfig()
    inner = divisor.domain.inner_point()
    probe = global_roof_eval(divisor, inner)
    if probe.is_minus_inf:
        raise ValueError("global roof function does not exist (-inf at an inner point)")
    breakdown = []
    total = ZERO_HEIGHT
    for place in divisor.places():
        term = integrate(divisor.roof_at(place), cfg).scale(place.weight)
        breakdown.append((f"place {place.label}", term))
        total = total + term
        if total.is_minus_inf:
            return HeightValue.minus_inf(
                flags=total.flags, breakdown=tuple(breakdown), trace=term.trace
            )
    if divisor.family is not None:
        fam_total = _series_sum(divisor.family, divisor.family_weight, cfg)
        breakdown.append((f"family {divisor.family.describe()}", fam_total))
        total = total + fam_total
        if total.is_minus_inf:
            return HeightValue.minus_inf(
                flags=total.flags, breakdown=tuple(breakdown), trace=fam_total.trace
            )
    fact = _factorial(divisor.dim + 1)
    result = total.scale(fact)
    return HeightValue(
        result.kind,
        result.value,
        result.abs_error,
        result.flags,
        tuple(breakdown),
        total.trace,
    )


def mixed_intersection(divisors, cfg=None):
    """Sum over places of mixed integrals of the per-place roof tuples."""
    from .adelic import Place

    cfg = cfg or IntegrationConfig()
    divisors = list(divisors)
    dims = {d.dim for d in divisors}
    if len(dims) != 1:
        raise ValueError("divisors live in different dimensions")
    d = dims.pop()
    if len(divisors) != d + 1:
        raise ValueError(f"need exactly {d + 1} divisors for dimension {d}")
    with_family = [dv for dv in divisors if dv.family is not None]
    places = sorted(set().union(*[set(dv.places()) for dv in divisors]), key=Place.sort_key)
    total = ZERO_HEIGHT
    breakdown = []
    for place in places:
        roofs = [dv.roof_at(place) for dv in divisors]
        term = mixed_integral(roofs, cfg).scale(place.weight)
        breakdown.append((f"place {place.label}", term))
        total = total + term
        if total.is_minus_inf:
            return HeightValue.minus_inf(
                flags=tuple(dict.fromkeys(total.flags + ("lower-bound-only",))),
                breakdown=tuple(breakdown),
                trace=term.trace,
            )
    if len(with_family) > 1:
        raise UnsupportedCombination("at most one divisor may carry an infinite family")
    if with_family:
        fam_div = with_family[0]

        def mixed_term(n, cfg):
            roofs = []
            for dv in divisors:
                if dv is fam_div:
                    roofs.append(fam_div.family.generator(n))
                else:
                    roofs.append(dv.default)
            return mixed_integral(roofs, cfg)

        fam_total = _series_sum_indices(fam_div, mixed_term, cfg)
        breakdown.append((f"family {fam_div.family.describe()}", fam_total))
        total = total + fam_total
        if total.is_minus_inf:
            return HeightValue.minus_inf(
                flags=tuple(dict.fromkeys(total.flags + ("lower-bound-only",))),
                breakdown=tuple(breakdown),
            )
    return HeightValue(
        total.kind, total.value, total.abs_error, total.flags, tuple(breakdown)
    )


def _series_sum_indices(fam_div, term_fn, cfg):
    total = ZERO_HEIGHT
    weight = fam_div.family_weight
    small_streak = 0
    n = fam_div.family.start
    while n < fam_div.family.start + cfg.series_budget:
        term = term_fn(n, cfg).scale(weight)
        if term.is_minus_inf:
            return term
        total = total + term
        n += 1
        mag = abs(float(term.value))
        small_streak = small_streak + 1 if mag <= cfg.abs_tol else 0
        if small_streak >= 3:
            return HeightValue(
                "approx",
                float(total.value),
                total.abs_error + 10 * cfg.abs_tol,
                tuple(dict.fromkeys(total.flags + ("heuristic-truncation",))),
            )
    return HeightValue(
        "approx",
        float(total.value),
        total.abs_error + abs(float(total.value)) * 0.01 + cfg.abs_tol,
        tuple(dict.fromkeys(total.flags + ("heuristic-truncation",))),
    )
