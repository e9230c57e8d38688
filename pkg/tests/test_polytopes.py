from fractions import Fraction as F

import pytest

from toricheights.polytopes import (
    Ball,
    DimensionMismatch,
    EmptyBody,
    Polytope,
    minkowski_sum,
    shrink,
    triangulate,
    upper_hull,
    volume,
)

from conftest import rand_fraction


def rand_polytope(rng, dim, n=6):
    pts = [tuple(rand_fraction(rng) for _ in range(dim)) for _ in range(n)]
    return Polytope.from_points(pts, dim)


def test_minkowski_examples():
    iv = Polytope.interval(0, 1)
    assert minkowski_sum(iv, iv) == Polytope.interval(0, 2)
    assert minkowski_sum(iv, Polytope(1, [(0,)])) == iv
    tri = Polytope(2, [(0, 0), (1, 0), (0, 1)])
    seg = Polytope(2, [(0, 0), (1, 0)])
    expected = Polytope(2, [(0, 0), (2, 0), (1, 1), (0, 1)])
    assert minkowski_sum(tri, seg) == expected


def test_minkowski_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minkowski_sum(Polytope.interval(0, 1), Polytope(2, [(0, 0)]))


def test_volume_examples():
    assert volume(Polytope.box((0, 0), (1, 1))) == 1
    assert volume(Polytope(2, [(0, 0), (1, 0), (0, 1)])) == F(1, 2)
    assert volume(Polytope(2, [(0, 0), (2, 0), (1, 1), (0, 1)])) == F(3, 2)
    # lower-dimensional: ambient volume 0
    assert volume(Polytope(2, [(0, 0), (1, 0)])) == 0


def test_volume_matches_shoelace(rng):
    for _ in range(15):
        p = rand_polytope(rng, 2, n=8)
        if p.intrinsic_dim < 2:
            continue
        ring = p._order_polygon(list(p.vertices))
        n = len(ring)
        shoelace = sum(
            ring[i][0] * ring[(i + 1) % n][1] - ring[(i + 1) % n][0] * ring[i][1]
            for i in range(n)
        ) / 2
        assert p.volume() == abs(shoelace)


def test_triangulate_volumes_sum(rng):
    for dim in (2, 3):
        for _ in range(8):
            p = rand_polytope(rng, dim, n=7)
            if p.intrinsic_dim < dim:
                continue
            parts = triangulate(p)
            total = sum(Polytope(dim, list(s), _trusted=True).volume() for s in parts)
            assert total == p.volume()


def test_ngon_triangle_count(rng):
    p = rand_polytope(rng, 2, n=12)
    n = len(p.vertices)
    assert len(triangulate(p)) == n - 2


def test_vh_roundtrip(rng):
    for dim in (1, 2, 3):
        p = rand_polytope(rng, dim, n=6)
        ineqs, eqs = p.ambient_facets()
        from toricheights.qlinalg import dot

        for v in p.vertices:
            assert all(dot(a, v) <= b for a, b in ineqs)
            assert all(dot(a, v) == b for a, b in eqs)
        k = p.intrinsic_dim
        origin, basis, _ = p.hull_frame()
        for a, b in p.facets_local():
            from toricheights.polytopes import hull_coords

            tight = sum(1 for v in p.vertices if dot(a, hull_coords(origin, basis, v)) == b)
            assert tight >= k


def test_minkowski_commutative_associative(rng):
    for _ in range(5):
        a = rand_polytope(rng, 2, 4)
        b = rand_polytope(rng, 2, 4)
        c = rand_polytope(rng, 2, 4)
        assert minkowski_sum(a, b) == minkowski_sum(b, a)
        assert minkowski_sum(minkowski_sum(a, b), c) == minkowski_sum(a, minkowski_sum(b, c))


def test_volume_translation_invariance(rng):
    for _ in range(5):
        p = rand_polytope(rng, 2, 6)
        t = tuple(rand_fraction(rng) for _ in range(2))
        assert p.translate(t).volume() == p.volume()


def test_shrink_examples():
    assert shrink(Polytope.interval(0, 1), F(1, 4)) == Polytope.interval(F(1, 4), F(3, 4))
    sq = Polytope.box((0, 0), (1, 1))
    assert shrink(sq, 0) == sq
    assert isinstance(shrink(sq, F(3, 5)), EmptyBody)
    assert isinstance(shrink(Ball((0, 0), 1), F(1, 2)), Ball)
    assert isinstance(shrink(Ball((0, 0), 1), 2), EmptyBody)


def test_upper_hull_examples():
    flat = upper_hull([((0,), 0), ((1,), 0)], 1)
    assert len(flat.cells) == 1
    assert flat.value((F(1, 2),)) == 0

    tent = upper_hull([((0,), 0), ((1,), 0), ((F(1, 2),), 1)], 1)
    slopes = sorted(g[0] for _, _, (g, h) in tent.cells)
    assert slopes == [-2, 2]
    assert tent.value((F(1, 4),)) == F(1, 2)


def test_upper_hull_dominates(rng):
    pts = [
        ((rand_fraction(rng), rand_fraction(rng)), rand_fraction(rng)) for _ in range(20)
    ]
    uh = upper_hull(pts, 2)
    for p, t in pts:
        assert uh.value(p) >= t
    # points on the hull are attained exactly
    assert any(uh.value(p) == t for p, t in pts)


def test_ball_membership():
    b = Ball((0, 0), 1)
    assert b.contains((F(1, 2), F(1, 2)))
    assert not b.contains((1, 1))
    assert b.contains((1, 0))  # boundary is included
