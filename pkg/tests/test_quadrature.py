import math

import numpy as np

from toricheights.intersect import IntegrationConfig
from toricheights.polytopes import OracleBody
from toricheights.quadrature import (
    adaptive_integrate,
    integrate_with_cutoffs,
    interval_cells,
    qmc_integrate,
    triangle_cells,
)


def test_interval_rule_polynomial():
    res, _ = adaptive_integrate(lambda p: p[:, 0] ** 6, interval_cells(0, 1), 1e-12)
    assert abs(res.value - 1 / 7) < 1e-12


def test_triangle_rule_polynomial():
    cells = triangle_cells([[(0, 0), (1, 0), (0, 1)]])
    res, _ = adaptive_integrate(lambda p: p[:, 0] * p[:, 1], cells, 1e-12)
    assert abs(res.value - 1 / 24) < 1e-10


def test_cutoff_trace_records_levels():
    def f(p):
        with np.errstate(divide="ignore"):
            return 1.0 - 1.0 / p[:, 0]

    out = integrate_with_cutoffs(f, interval_cells(0, 1), IntegrationConfig())
    assert out.kind == "minus_inf"
    rows = out.trace.rows
    assert len(rows) > 40
    # decrements approach log(2): the log-divergence signature
    decs = [r[3] for r in rows[-5:]]
    assert all(abs(d - math.log(2)) < 1e-3 for d in decs)
    rendered = out.trace.render()
    assert rendered.splitlines()[0].startswith("level")


def test_cutoff_converges_for_bounded():
    out = integrate_with_cutoffs(
        lambda p: -np.ones(len(p)) * 5.0, interval_cells(0, 2), IntegrationConfig()
    )
    assert out.kind == "finite"
    assert abs(out.value + 10.0) < 1e-6


def test_qmc_oracle_body():
    # quarter disk in the unit square via a membership oracle
    body = OracleBody(
        2,
        membership=lambda p: float(p[0]) ** 2 + float(p[1]) ** 2 <= 1,
        bbox=((0, 0), (1, 1)),
        inner=(0.25, 0.25),
    )
    cfg = IntegrationConfig(mc_samples=16384, seed=7)
    val, err = qmc_integrate(lambda p: np.ones(len(p)), body, cfg)
    assert abs(val - math.pi / 4) < max(5 * err, 5e-3)


def test_qmc_deterministic_given_seed():
    body = OracleBody(2, membership=lambda p: True, bbox=((0, 0), (1, 1)), inner=(0.5, 0.5))
    cfg = IntegrationConfig(mc_samples=4096, seed=123)
    a = qmc_integrate(lambda p: p[:, 0], body, cfg)
    b = qmc_integrate(lambda p: p[:, 0], body, cfg)
    assert a == b
