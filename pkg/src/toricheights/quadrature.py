"""Adaptive cell-subdivision quadrature with cutoff-based handling of
integrable boundary singularities.

The driver integrates max(f, -M_k) for a doubling sequence of cutoffs M_k.
Decrements between successive cutoff levels decide the outcome: geometric
contraction is extrapolated to a tail estimate (and the value corrected by
it); decrements that keep failing to contract by the stall factor for
max_doublings consecutive levels certify divergence, and the level trace is
returned so callers can raise the budget.
"""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

# Gauss 7 / Kronrod 15 pair on [-1, 1].
_K15_X = np.array(
    [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_K15_W = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
_G7_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_G7_W = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
        0.381830050505119,
        0.279705391489277,
        0.129484966168870,
    ]
)

# Degree-5 7-point triangle rule (barycentric), plus the degree-2 midedge rule.
_TRI7 = [
    ((1 / 3, 1 / 3, 1 / 3), 0.225),
    ((0.059715871789770, 0.470142064105115, 0.470142064105115), 0.132394152788506),
    ((0.470142064105115, 0.059715871789770, 0.470142064105115), 0.132394152788506),
    ((0.470142064105115, 0.470142064105115, 0.059715871789770), 0.132394152788506),
    ((0.797426985353087, 0.101286507323456, 0.101286507323456), 0.125939180544827),
    ((0.101286507323456, 0.797426985353087, 0.101286507323456), 0.125939180544827),
    ((0.101286507323456, 0.101286507323456, 0.797426985353087), 0.125939180544827),
]
_TRI3 = [
    ((0.5, 0.5, 0.0), 1 / 3),
    ((0.0, 0.5, 0.5), 1 / 3),
    ((0.5, 0.0, 0.5), 1 / 3),
]

# Degree-2 4-point tetrahedron rule.
_TET_A = 0.5854101966249685
_TET_B = 0.1381966011250105


class Cell:
    __slots__ = ("kind", "geom", "measure", "value", "error", "order")

    def __init__(self, kind, geom, measure):
        self.kind = kind
        self.geom = geom
        self.measure = measure
        self.value = 0.0
        self.error = 0.0
        self.order = 0

    def sample_points(self):
        if self.kind == "interval":
            a, b = self.geom
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            return (mid + half * _K15_X)[:, None]
        if self.kind == "triangle":
            v = self.geom  # (3, 2)
            pts7 = np.array([b for b, _ in _TRI7]) @ v
            pts3 = np.array([b for b, _ in _TRI3]) @ v
            return np.vstack([pts7, pts3])
        if self.kind == "tet":
            v = self.geom  # (4, 3)
            bar = []
            for i in range(4):
                row = [_TET_B] * 4
                row[i] = _TET_A
                bar.append(row)
            bar.append([0.25] * 4)
            return np.array(bar) @ v
        raise ValueError(self.kind)

    def combine(self, vals):
        if self.kind == "interval":
            a, b = self.geom
            half = 0.5 * (b - a)
            v15 = half * float(_K15_W @ vals)
            v7 = half * float(_G7_W @ vals[_G7_IDX])
            self.value = v15
            self.error = abs(v15 - v7)
        elif self.kind == "triangle":
            w7 = np.array([w for _, w in _TRI7])
            w3 = np.array([w for _, w in _TRI3])
            v5 = self.measure * float(w7 @ vals[:7])
            v2 = self.measure * float(w3 @ vals[7:])
            self.value = v5
            self.error = abs(v5 - v2)
        else:  # tet
            v2 = self.measure * float(np.mean(vals[:4]))
            v0 = self.measure * float(vals[4])
            self.value = v2
            self.error = abs(v2 - v0)

    def split(self):
        if self.kind == "interval":
            a, b = self.geom
            m = 0.5 * (a + b)
            return [Cell("interval", (a, m), None), Cell("interval", (m, b), None)]
        if self.kind == "triangle":
            v = self.geom
            m01 = 0.5 * (v[0] + v[1])
            m12 = 0.5 * (v[1] + v[2])
            m02 = 0.5 * (v[0] + v[2])
            quarter = self.measure / 4.0
            return [
                Cell("triangle", np.array([v[0], m01, m02]), quarter),
                Cell("triangle", np.array([v[1], m01, m12]), quarter),
                Cell("triangle", np.array([v[2], m02, m12]), quarter),
                Cell("triangle", np.array([m01, m12, m02]), quarter),
            ]
        v = self.geom  # tet: bisect the longest edge
        best = None
        for i in range(4):
            for j in range(i + 1, 4):
                d = float(((v[i] - v[j]) ** 2).sum())
                if best is None or d > best[0]:
                    best = (d, i, j)
        _, i, j = best
        m = 0.5 * (v[i] + v[j])
        va = v.copy()
        va[i] = m
        vb = v.copy()
        vb[j] = m
        half = self.measure / 2.0
        return [Cell("tet", va, half), Cell("tet", vb, half)]


def _evaluate(cells, f):
    if not cells:
        return
    counts = []
    pts = []
    for c in cells:
        p = c.sample_points()
        counts.append(len(p))
        pts.append(p)
    allv = f(np.vstack(pts))
    pos = 0
    for c, n in zip(cells, counts):
        c.combine(allv[pos : pos + n])
        pos += n


@dataclass
class QuadResult:
    value: float
    error: float
    n_cells: int
    budget_hit: bool = False


def adaptive_integrate(f, cells, tol, max_cells=200_000, wave=64):
    """Refine the worst cells until the summed error estimate is below tol.

    Stops early (with an honest error) when refinement stalls on a plateau:
    kinks in two and three dimensions can pin the total estimate at a level
    proportional to the kink measure, where further splitting buys nothing.
    """
    _evaluate(cells, f)
    counter = 0
    heap = []
    for c in cells:
        c.order = counter
        counter += 1
        heapq.heappush(heap, (-c.error, c.order, c))
    total = sum(c.value for c in cells)
    err = sum(c.error for c in cells)
    n = len(cells)
    budget_hit = False
    # Plateaus only afflict meshes where kinks multiply under splitting;
    # one-dimensional drilling is linear in depth and must run to the end.
    watch_plateau = cells[0].kind != "interval"
    history = []
    while err > tol and heap:
        if n >= max_cells:
            budget_hit = True
            break
        history.append(err)
        if watch_plateau and len(history) >= 9 and history[-9] > 0 and err > 0.98 * history[-9]:
            break  # plateau: estimates no longer improve under refinement
        batch = []
        while heap and len(batch) < wave:
            e, _, c = heapq.heappop(heap)
            if -e <= tol / max(n, 1) / 8:
                heapq.heappush(heap, (e, c.order, c))
                break
            batch.append(c)
        if not batch:
            break
        children = []
        for c in batch:
            total -= c.value
            err -= c.error
            children.extend(c.split())
        _evaluate(children, f)
        for ch in children:
            ch.order = counter
            counter += 1
            total += ch.value
            err += ch.error
            heapq.heappush(heap, (-ch.error, ch.order, ch))
        n += len(children)
    final_cells = [c for _, _, c in heap]
    return QuadResult(total, err, n, budget_hit), final_cells


@dataclass
class DivergenceTrace:
    rows: list = field(default_factory=list)  # (level, cutoff, integral, decrement, ratio)

    def add(self, level, cutoff, integral, decrement, ratio):
        self.rows.append((level, cutoff, integral, decrement, ratio))

    def render(self):
        out = ["level cutoff integral decrement ratio"]
        for lvl, M, I, d, r in self.rows:
            out.append(f"{lvl:5d} {M:.3e} {I:+.9e} {d if d is None else round(d, 12)} {r}")
        return "\n".join(out)


@dataclass
class CutoffOutcome:
    kind: str  # 'finite' | 'minus_inf' | 'budget'
    value: float = 0.0
    error: float = math.inf
    trace: DivergenceTrace = None
    flags: tuple = ()


def integrate_with_cutoffs(f, base_cells, cfg):
    """Integrate f over the cells, clipping below at growing cutoffs.

    f maps an (n, d) array to values in R u {-inf}; the clipped integrand
    max(f, -M) is integrated adaptively per level, reusing the refined mesh.
    """
    trace = DivergenceTrace()
    prev = None
    prev_d = None
    prev_corrected = None
    prev_ratio = None
    armed = None  # pending extrapolation exit awaiting confirmation
    window_d0 = None
    window_len = 0
    quad_err = math.inf
    budget_flagged = False
    total_levels = 2 * cfg.max_doublings
    value = 0.0
    for level in range(total_levels + 1):
        M = float(cfg.cutoff_base) ** level

        def clipped(pts, _M=M):
            return np.maximum(f(pts), -_M)

        scale = max(1.0, abs(prev) if prev is not None else 1.0)
        base_tol = max(cfg.abs_tol / 4, cfg.rel_tol * scale / 4)
        if prev_d is None or prev_d <= 0:
            quad_tol = base_tol
        elif prev_d > 8 * max(cfg.abs_tol, cfg.rel_tol * scale):
            # Far from convergence (possibly divergent): the decrement scale
            # sets the resolution; chasing rel_tol here only burns cells.
            far_div = 64.0 if base_cells[0].kind == "interval" else 16.0
            quad_tol = max(prev_d / far_div, cfg.abs_tol / 64)
        else:
            quad_tol = max(min(base_tol, prev_d / 64), cfg.abs_tol / 64)
        if prev_d is not None and prev_d > 0 and base_cells[0].kind == "interval":
            # One-dimensional meshes are cheap; push the noise floor far down
            # so near-critical exponents get stable extrapolation ratios.
            quad_tol = min(quad_tol, max(prev_d / 4096, cfg.abs_tol / 64))
            if prev_ratio is not None and prev_ratio < 1.0:
                rr = min(prev_ratio, 0.995)
                tol_est = max(cfg.abs_tol, cfg.rel_tol * scale)
                quad_tol = min(
                    quad_tol, max(tol_est * (1.0 - rr) ** 2 / 10.0, 1e-13 * scale)
                )
        res, _ = adaptive_integrate(clipped, base_cells, quad_tol, cfg.max_subdivisions)
        value = res.value
        quad_err = res.error
        if res.budget_hit:
            # Underresolved levels make decrement ratios meaningless; stop
            # here and report the budget rather than risk a false verdict.
            trace.add(level, M, value, None, None)
            spread = (abs(prev_d) if prev_d else quad_err) * cfg.max_doublings
            return CutoffOutcome(
                "budget",
                prev_corrected if prev_corrected is not None else value,
                max(quad_err, spread),
                trace,
                ("budget-exceeded",),
            )
        if prev is None:
            trace.add(level, M, value, None, None)
            prev = value
            continue
        d = prev - value  # >= 0 up to quadrature noise
        ratio = (d / prev_d) if (prev_d is not None and prev_d > 0) else None
        trace.add(level, M, value, d, ratio)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        noise = 2 * quad_err + 1e-15 * abs(value)
        if d <= max(noise, tol / 4) and quad_err <= tol / 2:
            # cutoff inactive or tail below tolerance
            return CutoffOutcome(
                "finite",
                value,
                max(d, 0.0) + quad_err,
                trace,
                ("budget-exceeded",) if budget_flagged else (),
            )
        if ratio is not None and ratio < 1.0:
            # Geometric tail extrapolation; its uncertainty is driven by how
            # much the measured contraction ratio still moves.  Only a stable
            # ratio clearly below 1 is trusted for an early exit.
            r = min(ratio, 0.995)
            tail = d * r / (1.0 - r)
            corrected = value - tail
            if prev_corrected is not None and prev_ratio is not None:
                drift = abs(corrected - prev_corrected)
                ratio_err = abs(ratio - prev_ratio)
                stable = ratio <= 0.985 and ratio_err <= max(0.05 * (1.0 - r), 2e-4)
                err_est = 2.5 * (drift + quad_err + d * ratio_err / (1.0 - r) ** 2)
                if stable and err_est <= tol:
                    # Confirm on a second consecutive qualifying level.
                    if armed is not None:
                        return CutoffOutcome(
                            "finite", corrected, err_est + abs(corrected - armed), trace
                        )
                    armed = corrected
                else:
                    armed = None
            prev_corrected = corrected
        # Stall window: decrements must keep dropping below a stall-ratio
        # damped envelope; max_doublings consecutive failures mean divergence.
        d_pos = max(d, 0.0)
        if window_d0 is None or d_pos <= window_d0 * cfg.stall_ratio ** (window_len + 1):
            window_d0 = d_pos
            window_len = 0
        else:
            window_len += 1
        if window_len >= cfg.max_doublings:
            return CutoffOutcome("minus_inf", trace=trace)
        prev = value
        prev_d = d
        prev_ratio = ratio
    spread = (abs(prev_d) if prev_d else quad_err) * cfg.max_doublings
    return CutoffOutcome(
        "budget",
        prev_corrected if prev_corrected is not None else value,
        max(quad_err, spread),
        trace,
        ("budget-exceeded",),
    )


# -- base meshes --------------------------------------------------------------


def interval_cells(a, b):
    return [Cell("interval", (float(a), float(b)), None)]


def triangle_cells(triangles):
    cells = []
    for tri in triangles:
        v = np.array([[float(x) for x in p] for p in tri])
        area = abs(np.linalg.det(v[1:] - v[0])) / 2.0
        cells.append(Cell("triangle", v, area))
    return cells


def tet_cells(tets):
    cells = []
    for tet in tets:
        v = np.array([[float(x) for x in p] for p in tet])
        vol = abs(np.linalg.det(v[1:] - v[0])) / 6.0
        cells.append(Cell("tet", v, vol))
    return cells


def qmc_integrate(f, body, cfg):
    """Quasi-Monte-Carlo over the bounding box with membership rejection.

    Fallback for dimension > 3 or oracle bodies; the error bar is the 3-sigma
    of the batch-mean estimator (heuristic, flagged by callers).
    """
    lo, hi = body.bounding_box()
    lo = np.array([float(x) for x in lo])
    hi = np.array([float(x) for x in hi])
    dim = len(lo)
    try:
        from scipy.stats import qmc

        sampler = qmc.Sobol(d=dim, scramble=True, seed=cfg.seed)
        n = int(2 ** math.ceil(math.log2(max(cfg.mc_samples, 256))))
        pts = lo + (hi - lo) * sampler.random(n)
    except ImportError:  # pragma: no cover
        rng = np.random.default_rng(cfg.seed)
        n = max(cfg.mc_samples, 256)
        pts = lo + (hi - lo) * rng.random((n, dim))
    from fractions import Fraction

    if hasattr(body, "contains_batch"):
        mask = body.contains_batch(pts)
    else:
        mask = np.array(
            [body.contains([Fraction(x).limit_denominator(10**9) for x in p]) for p in pts]
        )
    box_vol = float(np.prod(hi - lo))
    vals = np.where(mask, f(pts), 0.0)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    batches = vals.reshape(16, -1).mean(axis=1) * box_vol
    return float(batches.mean()), 3.0 * float(batches.std(ddof=1) / math.sqrt(len(batches)))
