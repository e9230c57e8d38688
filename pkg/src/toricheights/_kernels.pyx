# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernel for roof-expression programs.

Same opcode set and out-of-domain conventions as kernels_py: the final value
is sanitized to -inf when non-finite.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN, isfinite, pow as cpow, sqrt as csqrt

cnp.import_array()

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_NEG = 2
DEF OP_ADD = 3
DEF OP_SUB = 4
DEF OP_MUL = 5
DEF OP_DIV = 6
DEF OP_SQRT = 7
DEF OP_POW = 8
DEF OP_MIN = 9
DEF OP_MAX = 10


def eval_program(cnp.int32_t[::1] ops, double[::1] args, pts):
    pts_arr = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[:, ::1] points = pts_arr
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t i, k, sp
    cdef int op
    cdef double a, b, arg
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef Py_ssize_t depth = 0, peak = 1
    for k in range(n_ops):
        op = ops[k]
        if op == OP_CONST or op == OP_VAR:
            depth += 1
        elif op >= OP_ADD and op != OP_SQRT and op != OP_POW:
            depth -= 1
        if depth > peak:
            peak = depth

    stack_arr = np.empty(peak + 1, dtype=np.float64)
    cdef double[::1] stack = stack_arr

    for i in range(n):
        sp = 0
        for k in range(n_ops):
            op = ops[k]
            arg = args[k]
            if op == OP_CONST:
                stack[sp] = arg
                sp += 1
            elif op == OP_VAR:
                stack[sp] = points[i, <Py_ssize_t> arg]
                sp += 1
            elif op == OP_NEG:
                stack[sp - 1] = -stack[sp - 1]
            elif op == OP_SQRT:
                a = stack[sp - 1]
                stack[sp - 1] = csqrt(a) if a >= 0 else NAN
            elif op == OP_POW:
                a = stack[sp - 1]
                if arg == <double> (<long long> arg):
                    stack[sp - 1] = cpow(a, arg)
                elif a > 0:
                    stack[sp - 1] = cpow(a, arg)
                elif a == 0:
                    stack[sp - 1] = INFINITY if arg < 0 else 0.0
                else:
                    stack[sp - 1] = NAN
            else:
                b = stack[sp - 1]
                a = stack[sp - 2]
                sp -= 1
                if op == OP_ADD:
                    stack[sp - 1] = a + b
                elif op == OP_SUB:
                    stack[sp - 1] = a - b
                elif op == OP_MUL:
                    stack[sp - 1] = a * b
                elif op == OP_DIV:
                    stack[sp - 1] = a / b
                elif op == OP_MIN:
                    if a != a or b != b:
                        stack[sp - 1] = NAN
                    else:
                        stack[sp - 1] = a if a < b else b
                else:
                    if a != a or b != b:
                        stack[sp - 1] = NAN
                    else:
                        stack[sp - 1] = a if a > b else b
        a = stack[0]
        out[i] = a if isfinite(a) else -INFINITY
    return out_arr
