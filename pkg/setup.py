"""Builds the optional compiled kernels; the package works without them."""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "convsql.neural.kernels._gates_cy",
                ["src/convsql/neural/kernels/_gates_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"convsql: skipping compiled kernels ({exc}); numpy fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
