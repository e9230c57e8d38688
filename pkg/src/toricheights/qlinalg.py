"""Exact linear algebra over the rationals.

Vectors are tuples of fractions.Fraction, matrices are lists of such tuples
(rows).  Everything here is small and dense; clarity over asymptotics.
"""

from fractions import Fraction
from math import gcd, isqrt

Q = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def qvec(xs):
    return tuple(Fraction(x) for x in xs)


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), ZERO)


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a):
    c = Fraction(c)
    return tuple(c * x for x in a)


def vneg(a):
    return tuple(-x for x in a)


def is_zero(a):
    return all(x == 0 for x in a)


def linf(a):
    return max((abs(x) for x in a), default=ZERO)


def _row_reduce(rows):
    """Gauss-Jordan; returns (rref rows, pivot column list)."""
    rows = [list(r) for r in rows]
    if not rows:
        return rows, []
    n = len(rows[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ONE / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(rows):
    return len(_row_reduce(rows)[0])


def solve(A, b):
    """Solve A x = b exactly (A square or overdetermined, consistent).

    Returns one solution or None if the system is inconsistent or
    underdetermined.
    """
    if not A:
        return None
    n = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    red, pivots = _row_reduce(aug)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    if n in pivots or len([p for p in pivots if p < n]) < n:
        return None
    x = [ZERO] * n
    for row, p in zip(red, pivots):
        x[p] = row[-1]
    return tuple(x)


def solve_affine(A, b):
    """Solve A x = b; returns (particular, nullspace basis) or None."""
    if not A:
        return None
    n = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    red, pivots = _row_reduce(aug)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    pivots = [p for p in pivots if p < n]
    free = [c for c in range(n) if c not in pivots]
    x = [ZERO] * n
    for row, p in zip(red, pivots):
        x[p] = row[-1]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return tuple(x), basis


def nullspace(rows):
    """Basis of {x : rows . x = 0}."""
    if not rows:
        return []
    n = len(rows[0])
    res = solve_affine(rows, [ZERO] * len(rows))
    return res[1] if res else [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)]


def det(A):
    A = [list(r) for r in A]
    n = len(A)
    d = ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return ZERO
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = -d
        d *= A[c][c]
        inv = ONE / A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] * inv
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return d


def primitive(v):
    """Scale a rational vector to a primitive integer vector (gcd 1)."""
    if is_zero(v):
        return tuple(0 for _ in v)
    v = qvec(v)
    m = 1
    for x in v:
        m = m * x.denominator // gcd(m, x.denominator)
    ints = [int(x * m) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints)


def sqrt_upper(x, scale=10**12):
    """Rational upper bound for sqrt(x), exact on perfect squares."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return ZERO
    p, q = x.numerator, x.denominator
    r = isqrt(p * q)
    if r * r == p * q:
        return Fraction(r, q)
    r = isqrt(p * q * scale * scale)
    return Fraction(r + 1, q * scale)
