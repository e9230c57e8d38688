import sys

from setuptools import Extension, setup


def ext_modules():
    # The compiled kernel is optional: the package falls back to the numpy
    # evaluator in toricheights.kernels_py when the extension is missing.
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    try:
        return cythonize(
            [
                Extension(
                    "toricheights._kernels",
                    ["src/toricheights/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                )
            ],
            language_level="3",
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"warning: skipping compiled kernel ({exc})", file=sys.stderr)
        return []


setup(ext_modules=ext_modules())
