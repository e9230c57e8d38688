"""Infinite roof families indexed by an enumeration of finite places.

A family supplies the generator n -> roof, the region where the n-th roof
vanishes (which makes global-roof evaluation a finite sum away from the
boundary), and certified tail bounds for the height series and, when
available, for pointwise value series.
"""

import math
from fractions import Fraction

from .concave import PARoof, RadialRoof, AnalyticRoof
from .polytopes import Ball, Polytope
from .qlinalg import ZERO


class RoofFamily:
    """Base interface; indices run n = start, start+1, ..."""

    start = 1
    name = "family"
    sup_value = Fraction(0)  # declared sup of every generator
    monotone_regions = True  # vanishing_region(n) grows with n

    def generator(self, n):
        raise NotImplementedError

    def vanishing_region(self, n):
        return None

    def tail_bound(self, N):
        """Certified bound on |sum_{n > N} integral(generator(n))|, or None."""
        return None

    def value_tail_bound(self, N, y):
        """Certified bound on |sum_{n > N} generator(n)(y)|, or None."""
        return None

    def describe(self):
        return self.name


class SimplexRampFamily(RoofFamily):
    """theta_n(y) = min(y - 2^-n, 0) on [0, 1]; piecewise affine."""

    name = "simplex_ramp"
    start = 1

    def __init__(self):
        self.domain = Polytope.interval(0, 1)

    def generator(self, n):
        eps = Fraction(1, 2**n)
        return PARoof([((ZERO,), -eps), ((eps,), ZERO), ((Fraction(1),), ZERO)], 1)

    def vanishing_region(self, n):
        return Polytope.interval(Fraction(1, 2**n), 1)

    def tail_bound(self, N):
        # |integral theta_n| = 2^(-2n-1); geometric tail.
        return Fraction(1, 6 * 4**N)

    def value_tail_bound(self, N, y):
        # |theta_n(y)| <= 2^-n pointwise.
        return Fraction(1, 2**N)


class PowerCuspFamily(RoofFamily):
    """theta_n(y) = min(0, 1 - 2^(n a) y^a) on (0, 1], -inf at 0; a in (-1, 0)."""

    name = "power_cusp"
    start = 1

    def __init__(self, alpha):
        alpha = Fraction(alpha)
        if not -1 < alpha < 0:
            raise ValueError("exponent must lie in (-1, 0)")
        self.alpha = alpha
        self.domain = Polytope.interval(0, 1)

    def generator(self, n):
        # The scale 2^(n a) is irrational for fractional a; fold it to a float
        # literal (analytic roofs evaluate in floats regardless).
        a = self.alpha
        c = 2.0 ** (n * float(a))
        roof = AnalyticRoof(f"min(0, 1 - {c!r}*pow(y1, {a}))", self.domain)
        roof.support_hint = Polytope.interval(0, Fraction(1, 2**n))
        return roof

    def vanishing_region(self, n):
        return Polytope.interval(Fraction(1, 2**n), 1)

    def tail_bound(self, N):
        # |integral theta_n| = |a/(2^n (a+1))|; geometric with ratio 1/2.
        a = self.alpha
        return abs(float(a / (a + 1))) / 2.0**N

    def value_tail_bound(self, N, y):
        if all(Fraction(x) >= Fraction(1, 2**N) for x in y):
            return 0.0
        return None


class RadialPowerCuspFamily(RoofFamily):
    """Radial analogue on the unit disk: 0 up to radius 1-2^-n, then the cusp
    1 - 2^(n a)(1-r)^a, -inf on the boundary circle."""

    name = "radial_power_cusp"
    start = 1

    def __init__(self, alpha, dim=2):
        alpha = Fraction(alpha)
        if not -1 < alpha < 0:
            raise ValueError("exponent must lie in (-1, 0)")
        self.alpha = alpha
        self.dim = dim
        self.domain = Ball((0,) * dim, 1)

    def generator(self, n):
        a = self.alpha
        c = 2.0 ** (n * float(a))
        roof = RadialRoof(f"min(0, 1 - {c!r}*pow(1 - y1, {a}))", self.domain)
        roof.radial_support = (1 - Fraction(1, 2**n), Fraction(1))
        return roof

    def vanishing_region(self, n):
        return Ball((0,) * self.dim, 1 - Fraction(1, 2**n))

    def tail_bound(self, N):
        # |integral| <= 2 pi 2^-n |a|/(a+1) (the Jacobian-free bound already
        # dominates the true term); geometric with ratio 1/2.
        a = float(self.alpha)
        per = 2 * math.pi * (abs(a / (a + 1)) + 0.5)
        return per / 2.0**N

    def value_tail_bound(self, N, y):
        r2 = sum(Fraction(x) ** 2 for x in y)
        if r2 <= (1 - Fraction(1, 2**N)) ** 2:
            return 0.0
        return None


BUILTIN_FAMILIES = {
    "simplex_ramp": SimplexRampFamily,
    "power_cusp": PowerCuspFamily,
    "radial_power_cusp": RadialPowerCuspFamily,
}


def make_family(name, **params):
    if name not in BUILTIN_FAMILIES:
        raise KeyError(f"unknown family {name!r}; built-ins: {sorted(BUILTIN_FAMILIES)}")
    return BUILTIN_FAMILIES[name](**params)
