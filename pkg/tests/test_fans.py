import random
from fractions import Fraction as F

import pytest

from toricheights.concave import PAConcave
from toricheights.fans import (
    ArithmeticFan,
    Cone,
    Fan,
    NotComplete,
    NotSmooth,
    SupportFunction,
    SupportMismatch,
    ToricDivisorData,
    canonical_extension,
    common_refinement,
    divisor_from_support,
    is_ample,
    is_complete,
    is_effective,
    is_projective,
    is_relatively_nef,
    is_smooth,
    level_zero_slice,
    normal_fan,
    smooth_refinement_2d,
    support_from_divisor,
    validate_arithmetic_fan,
    validate_fan_morphism,
    weil_decomposition,
)
from toricheights.polytopes import Polytope
from toricheights.qlinalg import det, dot


P1 = Fan(1, [Cone([(1,)]), Cone([(-1,)])])
P2 = Fan(2, [Cone([(1, 0), (0, 1)]), Cone([(0, 1), (-1, -1)]), Cone([(-1, -1), (1, 0)])])
P1xP1 = Fan(
    2,
    [
        Cone([(1, 0), (0, 1)]),
        Cone([(0, 1), (-1, 0)]),
        Cone([(-1, 0), (0, -1)]),
        Cone([(0, -1), (1, 0)]),
    ],
)


def test_is_smooth_examples():
    assert is_smooth(Fan(2, [Cone([(1, 0), (0, 1)])]))
    assert not is_smooth(Fan(2, [Cone([(1, 0), (1, 2)])]))
    assert is_smooth(P2)


def test_smooth_matches_determinant_oracle(rng):
    for _ in range(30):
        while True:
            g1 = (rng.randint(-3, 3), rng.randint(-3, 3))
            g2 = (rng.randint(-3, 3), rng.randint(-3, 3))
            d = g1[0] * g2[1] - g1[1] * g2[0]
            if d != 0:
                break
        cone = Cone([g1, g2])
        gens = cone.generators
        oracle = abs(det([list(g) for g in gens])) == 1
        assert cone.is_smooth() == oracle


def test_is_complete_examples():
    assert is_complete(P1)
    assert not is_complete(Fan(2, [Cone([(1, 0), (0, 1)])]))
    assert is_complete(P2)
    assert not is_complete(Fan(1, [Cone([(1,)])]))


def test_is_projective_examples():
    assert is_projective(P1)
    assert is_projective(P2)
    assert is_projective(P1xP1)
    with pytest.raises(NotComplete):
        is_projective(Fan(2, [Cone([(1, 0), (0, 1)])]))


def test_common_refinement():
    diag = Fan(
        2,
        [
            Cone([(1, 1), (-1, 1)]),
            Cone([(-1, 1), (-1, -1)]),
            Cone([(-1, -1), (1, -1)]),
            Cone([(1, -1), (1, 1)]),
        ],
    )
    ref = common_refinement(P1xP1, diag)
    assert len(ref.cones) == 8
    assert ref.refines(P1xP1) and ref.refines(diag)
    assert common_refinement(P2, P2) == P2
    assert common_refinement(P1, P1) == P1
    with pytest.raises(SupportMismatch):
        common_refinement(P1xP1, Fan(2, [Cone([(1, 0), (0, 1)])]))


def test_canonical_extension():
    ce = canonical_extension(P1)
    assert len(ce.cones) == 2
    assert len(ce.all_faces()) == 6  # two 2-cones, three rays, the origin
    assert is_smooth(canonical_extension(P2))
    assert level_zero_slice(canonical_extension(P2)) == P2
    triv = Fan(1, [], validate=False)
    assert [c.generators for c in canonical_extension(triv).cones] == [((0, 1),)]
    # the extension keeps smoothness and fills the upper halfspace
    from toricheights.fans import is_complete_halfspace

    for fan in (P1, P2):
        ext = canonical_extension(fan)
        assert is_smooth(ext) == is_smooth(fan)
        assert is_complete_halfspace(ext) == is_complete(fan)


def test_smooth_refinement_2d():
    sing = Fan(2, [Cone([(1, 0), (1, 2)])])
    ref = smooth_refinement_2d(sing)
    assert sorted(c.generators for c in ref.cones) == [
        ((1, 0), (1, 1)),
        ((1, 1), (1, 2)),
    ]
    assert is_smooth(ref) and ref.refines(sing)
    sing2 = Fan(2, [Cone([(1, 0), (2, 3)])])
    ref2 = smooth_refinement_2d(sing2)
    assert is_smooth(ref2) and ref2.refines(sing2)
    assert smooth_refinement_2d(P2) == P2


def test_support_from_divisor_roundtrip():
    dv = ToricDivisorData({(1,): F(0), (-1,): F(1)})
    sf = support_from_divisor(P1, dv)
    assert sf.value((2,)) == 0 and sf.value((-2,)) == -2
    assert divisor_from_support(sf).horizontal == dv.horizontal
    # zero divisor
    z = support_from_divisor(P1, ToricDivisorData({}))
    assert z.value((5,)) == 0
    # |x| divisor with a vertical shift at one prime
    dv2 = ToricDivisorData({(1,): F(1), (-1,): F(1)}, {("2", (0, 1)): F(0)})
    pa = support_from_divisor(P1, dv2, prime="2")
    assert isinstance(pa, PAConcave)
    assert pa.stability_set() == Polytope.interval(-1, 1)
    with pytest.raises(NotSmooth):
        support_from_divisor(Fan(2, [Cone([(1, 0), (1, 2)])]), ToricDivisorData({}))


def test_roundtrip_random(rng):
    for _ in range(10):
        coeffs = {v: F(rng.randint(-3, 3)) for v in P2.rays()}
        sf = support_from_divisor(P2, ToricDivisorData(coeffs))
        assert divisor_from_support(sf).horizontal == coeffs


def test_effectivity():
    psi_b = PAConcave(1, [((1,), 0), ((-1,), 0)])
    assert is_effective([PAConcave(1, [((0,), 0)])])
    assert is_effective([psi_b, psi_b.add_constant(-1)])
    assert not is_effective([PAConcave(1, [((0,), 1)])])
    # support-function form
    sf = support_from_divisor(P1, ToricDivisorData({(1,): F(1), (-1,): F(1)}))
    assert is_effective([sf])
    bad = support_from_divisor(P1, ToricDivisorData({(1,): F(-1)}))
    assert not is_effective([bad])


def test_nef_ample():
    sf = support_from_divisor(P1, ToricDivisorData({(1,): F(0), (-1,): F(1)}))
    assert is_relatively_nef(sf) and is_ample(sf)
    zero = support_from_divisor(P1, ToricDivisorData({}))
    assert is_relatively_nef(zero) and not is_ample(zero)
    convex = SupportFunction(P1, ((F(1),), (F(0),)))  # max(0, x): not concave
    assert not is_relatively_nef(convex)


def projective_space_fan(d):
    basis = [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    gens = basis + [tuple(-1 for _ in range(d))]
    return Fan(d, [Cone([g for i, g in enumerate(gens) if i != drop]) for drop in range(d + 1)])


def test_nef_matches_midpoint_sampling(rng):
    fans = [P1, P2, projective_space_fan(3)]
    for trial in range(9):
        fan = fans[trial % 3]
        dim = fan.dim
        coeffs = {v: F(rng.randint(-2, 2)) for v in fan.rays()}
        sf = support_from_divisor(fan, ToricDivisorData(coeffs))
        verdict = is_relatively_nef(sf)

        def psi(x):
            c = sf.fan.find_cone(x)
            return dot(sf.functionals[sf.fan.cones.index(c)], x)

        sampled = True
        for _ in range(1000):
            a = tuple(F(rng.randint(-8, 8), 4) for _ in range(dim))
            b = tuple(F(rng.randint(-8, 8), 4) for _ in range(dim))
            mid = tuple((x + y) / 2 for x, y in zip(a, b))
            if psi(mid) < (psi(a) + psi(b)) / 2:
                sampled = False
                break
        assert verdict == sampled


def test_support_divisor_value_roundtrip(rng):
    for _ in range(8):
        coeffs = {v: F(rng.randint(-3, 3)) for v in P2.rays()}
        sf = support_from_divisor(P2, ToricDivisorData(coeffs))
        back = support_from_divisor(P2, divisor_from_support(sf))
        for v in P2.rays():
            assert back.value(v) == sf.value(v)


def test_arithmetic_fan_validation():
    af = ArithmeticFan(P1, {})
    assert all(item.passed for item in validate_arithmetic_fan(af))
    # broken slice
    half = canonical_extension(Fan(1, [Cone([(1,)])]))
    bad = ArithmeticFan(P1, {"2": half})
    items = validate_arithmetic_fan(bad)
    assert not items[0].passed
    # refined vertical cone: still valid, recognized as effective
    ref = Fan(
        2,
        [Cone([(1, 0), (1, 1)]), Cone([(1, 1), (0, 1)]), Cone([(0, 1), (-1, 0)])],
        validate=False,
    )
    good = ArithmeticFan(P1, {"2": ref})
    items = validate_arithmetic_fan(good)
    assert all(item.passed for item in items)
    assert items[-1].mode == "sufficient"


def test_fan_morphism_refinement():
    ref = Fan(
        2,
        [Cone([(1, 0), (1, 1)]), Cone([(1, 1), (0, 1)]), Cone([(0, 1), (-1, 0)])],
        validate=False,
    )
    src = ArithmeticFan(P1, {"2": ref})
    dst = ArithmeticFan(P1, {})
    phi = {"2": [[1, 0], [0, 1]]}
    items = validate_fan_morphism(phi, src, dst)
    assert all(item.passed for item in items)
    assert items[-1].name == "refinement"


def test_weil_decomposition():
    psi = PAConcave(1, [((0,), 0), ((1,), 0)])
    # canonical data: no vertical part
    dec = weil_decomposition(ArithmeticFan(P1, {}), {"2": psi})
    assert dec.vertical == {}
    assert dec.horizontal == {(1,): 0, (-1,): 1}
    # shifted at one prime: vertical coefficient 1 on the ray (0, 1)
    dec2 = weil_decomposition(ArithmeticFan(P1, {}), {"2": psi.add_constant(-1)})
    assert dec2.vertical == {("2", (0, 1)): 1}


def test_weil_matches_evaluation(rng):
    # random piecewise-affine level-1 data on the canonical extension
    for _ in range(6):
        b = F(rng.randint(-3, 3))
        psi = PAConcave(1, [((0,), 0), ((1,), 0)])
        gamma = psi.add_constant(b)
        dec = weil_decomposition(ArithmeticFan(P1, {}), {"7": gamma})
        expected = {("7", (0, 1)): -b} if b != 0 else {}
        assert dec.vertical == expected


def test_normal_fan():
    nf = normal_fan(Polytope(2, [(0, 0), (1, 0), (0, 1)]))
    assert len(nf.cones) == 3
    assert is_complete(nf)
    nf1 = normal_fan(Polytope.interval(0, 1))
    assert sorted(c.generators for c in nf1.cones) == [((-1,),), ((1,),)]


def test_fan_morphism_condition_failures():
    # a nonzero bottom-left entry maps N x {0} off the level-0 hyperplane
    phi = {"2": [[1, 0], [1, 1]]}
    src = ArithmeticFan(P1, {})
    dst = ArithmeticFan(P1, {})
    items = validate_fan_morphism(phi, src, dst)
    by_name = {it.name: it for it in items}
    assert not by_name["common level-0 restriction"].passed


def test_projective_space_fan_any_d():
    from toricheights.adelic import projective_space_fan

    for d in (1, 2, 3):
        fan = projective_space_fan(d)
        assert is_smooth(fan)
        if d <= 3:
            assert is_complete(fan)


def test_weil_on_refined_fan_matches_evaluation_oracle():
    # vertical fan over the line subdivided at the ray (1, 1); the level-1
    # function gamma(x) = min(x - 1, -x - 1, -3x + 1) is affine on its cells
    ref = Fan(
        2,
        [Cone([(1, 0), (1, 1)]), Cone([(1, 1), (0, 1)]), Cone([(0, 1), (-1, 0)])],
        validate=False,
    )
    af = ArithmeticFan(P1, {"5": ref})
    gamma = PAConcave(1, [((F(1),), F(-1)), ((F(-1),), F(-1)), ((F(-3),), F(1))])
    dec = weil_decomposition(af, {"5": gamma})
    # horizontal: a_rho = -rec(gamma)(v_rho)
    assert dec.horizontal == {(1,): 3, (-1,): 1}
    # vertical: -Phi(w) at each vertical ray, Phi(x, t) = t * gamma(x / t)
    assert dec.vertical == {("5", (1, 1)): 2, ("5", (0, 1)): 1}
    for (_, ray), coeff in dec.vertical.items():
        t = ray[-1]
        assert coeff == -t * gamma.eval((F(ray[0], t),))
