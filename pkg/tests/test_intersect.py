import math
import random
from fractions import Fraction as F


from toricheights.adelic import AdelicDivisor, Place, check_nef, regularize
from toricheights.concave import AnalyticRoof, PARoof, indicator
from toricheights.intersect import (
    IntegrationConfig,
    integrate_exact,
    integrate_numeric,
    mixed_integral,
    mixed_intersection,
    self_intersection,
)
from toricheights.polytopes import Ball, Polytope

from conftest import rand_paroof

IV = Polytope.interval(0, 1)


def test_integrate_exact_examples():
    ramp = PARoof([((0,), F(-1, 2)), ((F(1, 2),), 0), ((1,), 0)], 1)
    assert integrate_exact(ramp) == F(-1, 8)
    assert integrate_exact(indicator(Polytope.box((0, 0), (1, 1)))) == 0
    aff = PARoof([((0, 0), 0), ((1, 0), 1), ((0, 1), 0)], 2)
    assert integrate_exact(aff) == F(1, 6)
    seg = indicator(Polytope(2, [(0, 0), (1, 0)]))
    assert integrate_exact(seg) == 0


def test_integrate_numeric_examples():
    cfg = IntegrationConfig(rel_tol=1e-5, abs_tol=1e-8)
    r = AnalyticRoof("1 - pow(y1, -1/2)", IV)
    hv = integrate_numeric(r, cfg)
    assert abs(hv.value + 1) <= max(hv.abs_error, 1e-5)
    assert integrate_numeric(AnalyticRoof("1 - pow(y1, -1)", IV), IntegrationConfig()).is_minus_inf
    one = AnalyticRoof("1 + 0*y1", Ball((0, 0), 1))
    hv = integrate_numeric(one, cfg)
    assert abs(hv.value - math.pi) < 1e-6


def test_exact_numeric_agreement(rng):
    cfg = IntegrationConfig(rel_tol=1e-5, abs_tol=1e-8)
    for trial in range(20):
        dim = 1 + trial % 2
        roof = rand_paroof(rng, dim)
        exact = integrate_exact(roof)
        hv = integrate_numeric(roof, cfg)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(float(exact))) * 10
        assert abs(hv.value - float(exact)) <= tol


def test_mixed_integral_examples():
    iota = indicator(IV)
    assert mixed_integral([iota, iota]).value == 0
    ramp = PARoof([((0,), F(-1, 2)), ((F(1, 2),), 0), ((1,), 0)], 1)
    mi = mixed_integral([ramp, ramp])
    assert mi.kind == "exact" and mi.value == F(-1, 4)
    one = indicator(IV).add_constant(1)
    zero = indicator(IV)
    assert mixed_integral([one, zero]).value == 1


def test_mixed_integral_polarization(rng):
    # MI(theta, ..., theta) = (d+1)! * integral(theta)
    for trial in range(20):
        dim = 1 + trial % 2
        roof = rand_paroof(rng, dim)
        fact = math.factorial(dim + 1)
        mi = mixed_integral([roof] * (dim + 1))
        assert mi.kind == "exact"
        assert mi.value == fact * integrate_exact(roof)


def test_mixed_integral_symmetry(rng):
    for _ in range(6):
        a, b = rand_paroof(rng, 1), rand_paroof(rng, 1)
        m1 = mixed_integral([a, b])
        m2 = mixed_integral([b, a])
        assert m1.value == m2.value


def test_divergence_table():
    # finite for alpha in {-0.2, -0.5, -0.9}; -inf for {-1, -1.5}
    for alpha, finite in [
        (F(-1, 5), True),
        (F(-1, 2), True),
        (F(-9, 10), True),
        (F(-1), False),
        (F(-3, 2), False),
    ]:
        r = AnalyticRoof(f"1 - pow(y1, {alpha})", IV)
        hv = integrate_numeric(r, IntegrationConfig(rel_tol=1e-4, abs_tol=1e-7))
        if finite:
            true = float(alpha / (alpha + 1))
            assert hv.kind == "approx"
            assert abs(hv.value - true) <= max(hv.abs_error, 1e-4 * abs(true))
        else:
            assert hv.is_minus_inf
            assert hv.trace


def test_self_intersection_breakdown():
    d = AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.infinite(): indicator(IV).add_constant(1)},
    )
    hv = self_intersection(d)
    assert hv.kind == "exact" and hv.value == 2
    assert hv.breakdown[0][0] == "place oo"


def test_self_intersection_weights():
    # weights scale the per-place contributions linearly
    d = AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place("infinite", "oo", F(1, 2)): indicator(IV).add_constant(1)},
    )
    assert self_intersection(d).value == 1


def test_nef_implies_nonnegative_height(rng):
    for _ in range(12):
        # lift a random roof so its minimum vertex value is zero: nef by design
        roof = rand_paroof(rng, 1)
        m = min(roof.vertex_values().values())
        roof = roof.add_constant(-m)
        d = AdelicDivisor(dim=1, domain=roof.domain, explicit={Place.infinite(): roof})
        assert check_nef(d).verdict == "Nef"
        hv = self_intersection(d)
        assert hv.kind == "exact" and hv.value >= 0


def test_monotone_heights_under_regularize():
    d = AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.infinite(): AnalyticRoof("1 - pow(y1, -1/2)", IV)},
    )
    cfg = IntegrationConfig(rel_tol=1e-4, abs_tol=1e-6)
    base = self_intersection(d, cfg)
    reg = self_intersection(regularize(d, F(1, 10)), cfg)
    assert float(reg.value) >= float(base.value) - base.abs_error - reg.abs_error


def test_mixed_intersection_boundary_square():
    from toricheights.adelic import standard_boundary_divisor

    bd = standard_boundary_divisor(1).divisor
    hv = mixed_intersection([bd, bd])
    assert hv.kind == "exact" and hv.value == 4


def test_lower_dimensional_summand_contributes_zero():
    seg = AdelicDivisor(dim=2, domain=Polytope(2, [(0, 0), (1, 0)]))
    hv = self_intersection(seg)
    assert hv.kind == "exact" and hv.value == 0
