from fractions import Fraction as F

import numpy as np
import pytest

from toricheights.expr import (
    ArityError,
    Binary,
    Const,
    ExprSyntaxError,
    UnknownVariable,
    compile_expression,
    format_expression,
    parse_expression,
)
from toricheights import kernels, kernels_py


def ev(src, d, point):
    ops, args = compile_expression(parse_expression(src, d))
    return float(kernels.eval_program(ops, args, np.array([point], dtype=float))[0])


def test_min_node():
    node = parse_expression("min(0, y1 - 0.25)", 1)
    assert isinstance(node, Binary) and node.op == "min"
    assert isinstance(node.left, Const) and node.left.value == 0


def test_pow_substitution():
    assert ev("1 - pow(y1, -1/2)", 1, [0.25]) == -1.0


def test_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expression("pow(y1", 1)
    assert err.value.position == 7


def test_unknown_variable():
    with pytest.raises(UnknownVariable):
        parse_expression("y3 + 1", 2)
    with pytest.raises(ArityError):
        parse_expression("y1", 0)


def test_rational_and_decimal_literals():
    assert ev("1/4 + 0.25", 1, [0.0]) == 0.5
    assert ev("3/2 * y1", 1, [2.0]) == 3.0


def test_whitespace_insensitive():
    a = format_expression(parse_expression("min ( 0 , y1 )", 1))
    b = format_expression(parse_expression("min(0,y1)", 1))
    assert a == b


def test_out_of_domain_gives_minus_inf():
    assert ev("pow(y1, -1)", 1, [0.0]) == float("-inf")  # +inf sanitized
    assert ev("-pow(1 - y1, -1)", 1, [1.0]) == float("-inf")
    assert ev("sqrt(y1)", 1, [-1.0]) == float("-inf")
    assert ev("pow(y1, 1/2)", 1, [-0.5]) == float("-inf")


def test_backends_agree():
    rng = np.random.default_rng(3)
    cases = [
        ("1 - pow(y1, -1/2)", 1),
        ("min(0, 1 - 0.35*pow(y1, -7/10))", 1),
        ("-pow(1 - y2, -1)", 2),
        ("sqrt(y1) - y2/2 + max(y1, y2*y1)", 2),
    ]
    for src, d in cases:
        ops, args = compile_expression(parse_expression(src, d))
        pts = rng.random((500, d)) * 1.2 - 0.1
        a = kernels.eval_program(ops, args, pts)
        b = kernels_py.eval_program(ops, args, pts.copy())
        inf_a, inf_b = np.isneginf(a), np.isneginf(b)
        assert (inf_a == inf_b).all()
        assert np.allclose(a[~inf_a], b[~inf_b], rtol=1e-12, atol=0)
