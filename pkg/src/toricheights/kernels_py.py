"""Pure-Python (numpy) evaluation kernels.

Fallback backend for the compiled extension in _kernels.pyx; the two agree
up to floating-point rounding of the underlying pow/sqrt (at most an ulp).
Out-of-domain operations (fractional powers of negatives, sqrt of
negatives, 0/0) produce -inf in the final sanitization step: roof functions
take values in R u {-inf}.
"""

import numpy as np

from .expr import (
    OP_ADD,
    OP_CONST,
    OP_DIV,
    OP_MAX,
    OP_MIN,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
)

NEG_INF = float("-inf")


def eval_program(ops, args, points):
    """Run a compiled expression program over points of shape (n, d)."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in zip(ops, args):
            if op == OP_CONST:
                stack.append(np.full(n, arg))
            elif op == OP_VAR:
                stack.append(points[:, int(arg)].copy())
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_SQRT:
                stack[-1] = np.sqrt(stack[-1])
            elif op == OP_POW:
                base = stack[-1]
                if arg == round(arg):
                    stack[-1] = np.power(base, arg)
                else:
                    out = np.power(base, arg, where=base >= 0, out=np.full(n, np.nan))
                    zero_neg_exp = (base == 0.0) & (arg < 0)
                    out[zero_neg_exp] = np.inf
                    stack[-1] = out
            else:
                b = stack.pop()
                a = stack[-1]
                if op == OP_ADD:
                    stack[-1] = a + b
                elif op == OP_SUB:
                    stack[-1] = a - b
                elif op == OP_MUL:
                    stack[-1] = a * b
                elif op == OP_DIV:
                    stack[-1] = a / b
                elif op == OP_MIN:
                    stack[-1] = np.minimum(a, b)
                elif op == OP_MAX:
                    stack[-1] = np.maximum(a, b)
    out = stack[-1]
    out[~np.isfinite(out) | np.isnan(out)] = NEG_INF
    return out
