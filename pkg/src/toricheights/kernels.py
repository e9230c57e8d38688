"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementation when
the extension was not built.  Both expose eval_program(ops, args, points).
"""

try:
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import kernels_py as _impl

    BACKEND = "python"


def eval_program(ops, args, points):
    return _impl.eval_program(ops, args, points)


def backend_name():
    return BACKEND
