import random
from fractions import Fraction

import pytest

from toricheights import PAConcave, PARoof


def rand_fraction(rng, lo=-3, hi=3, den=4):
    return Fraction(rng.randint(lo * den, hi * den), den)


def rand_paconcave(rng, dim, n_pieces=None):
    """Random irredundant concave piecewise-affine function."""
    n = n_pieces or rng.randint(2, 4 if dim >= 3 else 5)
    while True:
        pieces = []
        for _ in range(n):
            m = tuple(rand_fraction(rng) for _ in range(dim))
            c = rand_fraction(rng)
            pieces.append((m, c))
        try:
            f = PAConcave(dim, pieces)
        except ValueError:
            continue
        if len(f.pieces) >= 2:
            return f


def rand_paroof(rng, dim, n_points=None):
    """Random piecewise-affine roof with a full-dimensional domain."""
    n = n_points or rng.randint(dim + 1, dim + 3)
    while True:
        lifted = []
        for _ in range(n):
            p = tuple(rand_fraction(rng, -2, 2) for _ in range(dim))
            t = rand_fraction(rng, -2, 2)
            lifted.append((p, t))
        roof = PARoof(lifted, dim)
        if roof.domain.intrinsic_dim == dim:
            return roof


@pytest.fixture
def rng():
    return random.Random(20260810)
