from fractions import Fraction as F

import numpy as np
import pytest

from toricheights.adelic import (
    AdelicDivisor,
    ModelGreens,
    Place,
    PointOutsideDomain,
    add,
    boundary_norm,
    check_nef,
    check_semipositive,
    global_roof_eval,
    regularize,
    standard_boundary_divisor,
)
from toricheights.concave import AnalyticRoof, PAConcave, indicator
from toricheights.families import make_family
from toricheights.intersect import self_intersection
from toricheights.polytopes import Polytope

from conftest import rand_fraction, rand_paconcave, rand_paroof

IV = Polytope.interval(0, 1)


def ramp_divisor():
    return AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.infinite(): indicator(IV).add_constant(1)},
        family=make_family("simplex_ramp"),
    )


def cusp_divisor(alpha):
    return AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.infinite(): AnalyticRoof(f"1 - pow(y1, {alpha})", IV)},
    )


def test_global_roof_values_ramp():
    d = ramp_divisor()
    assert global_roof_eval(d, (F(1, 2),)).value == 1
    assert global_roof_eval(d, (F(1, 4),)).value == F(3, 4)
    rv = global_roof_eval(d, (F(0),))
    assert abs(float(rv.value)) <= 1e-9 and rv.abs_error <= 1e-9
    with pytest.raises(PointOutsideDomain):
        global_roof_eval(d, (2,))


def test_global_roof_canonical_zero():
    d = AdelicDivisor(dim=1, domain=IV)
    for y in (F(0), F(1, 3), F(1)):
        rv = global_roof_eval(d, (y,))
        assert rv.value == 0 and rv.exact


def test_global_roof_cusp_value():
    d = cusp_divisor(F(-1, 2))
    rv = global_roof_eval(d, (F(1, 2),))
    assert abs(rv.value - (1 - 2**0.5)) < 1e-12
    assert global_roof_eval(d, (F(0),)).is_minus_inf


def test_check_semipositive_family():
    cert = check_semipositive(ramp_divisor())
    assert cert.passed
    assert cert.eps_sets["1/2"] == []
    assert cert.eps_sets["1/8"] == ["family[1]", "family[2]"]


def test_check_semipositive_rejects_bad_sup():
    # an explicit analytic roof at a finite place is not certifiable
    bad = AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.finite("2"): AnalyticRoof("0 - y1*y1", IV)},
    )
    cert = check_semipositive(bad)
    assert not cert.items[0].passed


def test_check_semipositive_nonzero_sup_joins_exceptional_set():
    d = AdelicDivisor(
        dim=1,
        domain=IV,
        explicit={Place.finite("3"): indicator(IV).add_constant(-1)},
    )
    cert = check_semipositive(d, eps_schedule=(F(1, 4),))
    assert cert.passed
    assert "3" in cert.eps_sets["1/4"]


def test_check_nef_verdicts():
    assert check_nef(ramp_divisor()).verdict == "Nef"
    v = check_nef(cusp_divisor(F(-1, 2)))
    assert v.verdict in ("NotNef", "NumericallyNotNef")
    bd = standard_boundary_divisor(1)
    assert check_nef(bd.divisor).verdict == "Nef"


def test_standard_boundary_divisor():
    bd = standard_boundary_divisor(1)
    assert bd.psi == PAConcave(1, [((1,), 0), ((-1,), 0)])
    assert bd.polytope == Polytope.interval(-1, 1)
    for y in (F(-1), F(0), F(1, 2), F(1)):
        assert global_roof_eval(bd.divisor, (y,)).value == 1
    # Green's data signs: negative everywhere at the archimedean place,
    # vanishing exactly at 0 at the other places
    g_inf = bd.greens_function(Place.infinite())
    assert g_inf.max_value() == -1
    g_fin = bd.greens_function(Place.finite("5"))
    assert g_fin.eval((0,)) == 0
    assert g_fin.eval((1,)) < 0 and g_fin.eval((-2,)) < 0


def test_boundary_norm_examples():
    bd = standard_boundary_divisor(1)
    canonical = ModelGreens(1, bd.psi)
    assert boundary_norm(canonical, bd) == 1
    zero = ModelGreens(1, PAConcave(1, [((0,), 0)]))
    assert boundary_norm(zero, bd) == 0
    scaled = ModelGreens(1, bd.psi.scale(3))
    assert boundary_norm(scaled, bd) == 3
    # nonzero value at 0 at a generic finite place: infinite norm
    off = ModelGreens(1, bd.psi, {Place.finite("2"): bd.psi.add_constant(-1)})
    assert boundary_norm(off, bd) is None


def test_boundary_norm_axioms(rng):
    bd = standard_boundary_divisor(1)
    for _ in range(12):
        f = rand_paconcave(rng, 1).recession()
        g = rand_paconcave(rng, 1).recession()
        nf = boundary_norm(ModelGreens(1, f), bd)
        ng = boundary_norm(ModelGreens(1, g), bd)
        nsum = boundary_norm(ModelGreens(1, f + g), bd)
        assert nsum <= nf + ng
        assert boundary_norm(ModelGreens(1, f.scale(2)), bd) == 2 * nf
        if nf == 0:
            assert all(m == (0,) and c == 0 for m, c in f.pieces)


def test_add_identity_and_constants():
    d = ramp_divisor()
    zero = AdelicDivisor(dim=1, domain=Polytope(1, [(0,)]))
    s = add(d, zero)
    assert s.domain == d.domain
    assert global_roof_eval(s, (F(1, 2),)).value == 1
    # iota + 1 added to itself doubles the constant and the domain
    one = AdelicDivisor(
        dim=1, domain=IV, explicit={Place.infinite(): indicator(IV).add_constant(1)}
    )
    two = add(one, one)
    assert two.domain == Polytope.interval(0, 2)
    assert global_roof_eval(two, (F(3, 2),)).value == 2


def test_add_commutes(rng):
    for _ in range(5):
        r1, r2 = rand_paroof(rng, 1), rand_paroof(rng, 1)
        d1 = AdelicDivisor(dim=1, domain=r1.domain, explicit={Place.infinite(): r1})
        d2 = AdelicDivisor(dim=1, domain=r2.domain, explicit={Place.infinite(): r2})
        a, b = add(d1, d2), add(d2, d1)
        assert a.domain == b.domain
        y = a.domain.inner_point()
        assert global_roof_eval(a, y).value == global_roof_eval(b, y).value


def test_global_roof_concavity_along_segments(rng):
    d = ramp_divisor()
    for _ in range(40):
        a = rand_fraction(rng, 0, 1, 16)
        b = rand_fraction(rng, 0, 1, 16)
        mid = (a + b) / 2
        va = global_roof_eval(d, (a,)).value
        vb = global_roof_eval(d, (b,)).value
        vm = global_roof_eval(d, (mid,)).value
        assert vm >= (va + vb) / 2 - F(1, 10**9)


def test_regularize_dominates_and_bounded():
    d = cusp_divisor(F(-1, 2))
    reg = regularize(d, F(1, 10))
    pts = [F(1, 100), F(1, 10), F(1, 2), F(9, 10)]
    for y in pts:
        orig = global_roof_eval(d, (y,))
        new = global_roof_eval(reg, (y,))
        if orig.is_minus_inf:
            continue
        assert float(new.value) >= float(orig.value) - 1e-9
    # bounded below on a dense grid (the unregularized roof is not)
    grid = np.linspace(1e-6, 1.0, 400)[:, None]
    vals = reg.roof_at(Place.infinite()).eval_batch(grid)
    assert np.isfinite(vals).all()
    assert vals.min() > -5.0


def test_regularize_monotone_in_eps():
    d = cusp_divisor(F(-1, 2))
    r1 = regularize(d, F(1, 5))
    r2 = regularize(d, F(1, 20))
    for y in (F(1, 50), F(1, 4), F(2, 3)):
        v1 = global_roof_eval(r1, (y,)).value
        v2 = global_roof_eval(r2, (y,)).value
        assert float(v1) >= float(v2) - 1e-9


def test_family_vanishing_soundness(rng):
    fam = make_family("simplex_ramp")
    for n in (1, 3, 6):
        region = fam.vanishing_region(n)
        roof = fam.generator(n)
        for _ in range(10):
            y = rand_fraction(rng, 0, 1, 64)
            if region.contains((y,)):
                assert roof.eval((y,)) == 0
    famc = make_family("power_cusp", alpha=F(-1, 2))
    for n in (1, 4):
        region = famc.vanishing_region(n)
        roof = famc.generator(n)
        for _ in range(10):
            y = rand_fraction(rng, 0, 1, 64)
            if region.contains((y,)) and y > 0:
                assert abs(roof.eval((y,))) < 1e-12


def test_family_without_vanishing_region_fails_collar():
    from toricheights.schema import ExpressionFamily

    fam = ExpressionFamily("min(0, 1 - pow(2, {n})*y1)", 1, IV, 1, None, None)
    d = AdelicDivisor(dim=1, domain=IV, family=fam)
    cert = check_semipositive(d)
    collar_items = [it for it in cert.items if it.name.startswith("eps-collar")]
    assert collar_items and not any(it.passed for it in collar_items)


def test_canonical_divisor_height_zero():
    from toricheights.intersect import self_intersection

    d = AdelicDivisor(dim=1, domain=IV)
    hv = self_intersection(d)
    assert hv.kind == "exact" and hv.value == 0
