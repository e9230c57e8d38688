"""Exact linear programming over the rationals.

A small two-phase primal simplex with Bland's rule, used for feasibility
questions on cones and piecewise-affine functions.  Problem sizes in this
package are tiny (a handful of variables, tens of constraints), so a dense
Fraction tableau is both fast enough and immune to round-off.
"""

from dataclasses import dataclass
from fractions import Fraction

from .qlinalg import ONE, ZERO

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: tuple | None
    value: Fraction | None


def _simplex(T, basis, nrows, ncols):
    """Minimize row -1 of tableau T in place.  Bland's rule, so it terminates."""
    while True:
        enter = next((j for j in range(ncols) if T[-1][j] < 0), None)
        if enter is None:
            return OPTIMAL
        leave = None
        best = None
        for i in range(nrows):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return UNBOUNDED
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        for i in range(nrows + 1):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], T[leave])]
        basis[leave] = enter


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, maximize=False):
    """Solve min (or max) c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    Variables are free; exact rational input and output.
    """
    A_ub = [list(map(Fraction, r)) for r in (A_ub or [])]
    b_ub = [Fraction(v) for v in (b_ub or [])]
    A_eq = [list(map(Fraction, r)) for r in (A_eq or [])]
    b_eq = [Fraction(v) for v in (b_eq or [])]
    c = [Fraction(v) for v in c]
    n = len(c)
    if maximize:
        c = [-v for v in c]

    # Standard form: free x -> u - w; slacks on inequalities.
    nslack = len(A_ub)
    width = 2 * n + nslack
    rows = A_ub + A_eq
    rhs = b_ub + b_eq

    def expand(row, slack_idx):
        out = [*(v for v in row), *(-v for v in row)] + [ZERO] * nslack
        if slack_idx is not None:
            out[2 * n + slack_idx] = ONE
        return out

    std = []
    for i, (row, bv) in enumerate(zip(rows, rhs)):
        slack = i if i < nslack else None
        erow = expand(row, slack)
        if bv < 0:
            erow = [-v for v in erow]
            bv = -bv
        std.append((erow, bv))

    m = len(std)
    # Phase 1 tableau with artificial variables.
    total = width + m
    T = []
    basis = []
    for i, (erow, bv) in enumerate(std):
        art = [ZERO] * m
        art[i] = ONE
        T.append(erow + art + [bv])
        basis.append(width + i)
    obj1 = [ZERO] * (total + 1)
    for i in range(m):
        obj1 = [a - b for a, b in zip(obj1, T[i])]
    for j in range(width, total):
        obj1[j] = ZERO
    T.append(obj1)
    _simplex(T, basis, m, total)
    if -T[-1][-1] != 0:
        return LPResult(INFEASIBLE, None, None)

    # Drive artificials out of the basis when possible.
    for i in range(m):
        if basis[i] >= width:
            enter = next((j for j in range(width) if T[i][j] != 0), None)
            if enter is None:
                continue
            piv = T[i][enter]
            T[i] = [x / piv for x in T[i]]
            for k in range(m + 1):
                if k != i and T[k][enter] != 0:
                    f = T[k][enter]
                    T[k] = [x - f * y for x, y in zip(T[k], T[i])]
            basis[i] = enter

    # Phase 2: replace objective, zero out artificial columns.
    cost = [*(v for v in c), *(-v for v in c)] + [ZERO] * nslack + [ZERO] * m + [ZERO]
    obj2 = list(cost)
    for i in range(m):
        if basis[i] < width and obj2[basis[i]] != 0:
            f = obj2[basis[i]]
            obj2 = [x - f * y for x, y in zip(obj2, T[i])]
    T[-1] = obj2
    for row in T:
        for j in range(width, total):
            row[j] = ZERO
    status = _simplex(T, basis, m, total)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None)
    xs = [ZERO] * width
    for i in range(m):
        if basis[i] < width:
            xs[basis[i]] = T[i][-1]
    x = tuple(xs[j] - xs[n + j] for j in range(n))
    value = -T[-1][-1]
    if maximize:
        value = -value
    return LPResult(OPTIMAL, x, value)


def feasible(A_ub=None, b_ub=None, A_eq=None, b_eq=None):
    n = len(A_ub[0]) if A_ub else (len(A_eq[0]) if A_eq else 0)
    res = solve_lp([ZERO] * n, A_ub, b_ub, A_eq, b_eq)
    return res.status == OPTIMAL


def feasible_nonneg(A_eq, b_eq):
    """Is {x >= 0 : A_eq x = b_eq} nonempty?  Phase-1 only, no splitting."""
    A = [list(map(Fraction, r)) for r in A_eq]
    b = [Fraction(v) for v in b_eq]
    m = len(A)
    n = len(A[0]) if A else 0
    T = []
    basis = []
    for i in range(m):
        row = list(A[i])
        bv = b[i]
        if bv < 0:
            row = [-v for v in row]
            bv = -bv
        art = [ZERO] * m
        art[i] = ONE
        T.append(row + art + [bv])
        basis.append(n + i)
    obj = [ZERO] * (n + m + 1)
    for i in range(m):
        obj = [a - t for a, t in zip(obj, T[i])]
    for j in range(n, n + m):
        obj[j] = ZERO
    T.append(obj)
    _simplex(T, basis, m, n + m)
    return -T[-1][-1] == 0


def max_min_affine(pieces, dim):
    """max_x min_i (<m_i, x> + c_i) for pieces (m_i, c_i).

    Returns (status, value, x); status 'unbounded' when the max is +inf.
    """
    # Variables (x, t): maximize t with t <= <m_i, x> + c_i.
    A_ub = []
    b_ub = []
    for m, cc in pieces:
        A_ub.append([-v for v in m] + [ONE])
        b_ub.append(cc)
    c = [ZERO] * dim + [ONE]
    res = solve_lp(c, A_ub, b_ub, maximize=True)
    if res.status != OPTIMAL:
        return res.status, None, None
    return OPTIMAL, res.value, res.x[:dim]
