"""Build script for the optional compiled solver kernel.

The package is fully functional without the extension; the banded-LU
kernel falls back to a NumPy implementation selected at import time.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "degenlab.kernels._pentalu",
                ["src/degenlab/kernels/_pentalu.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
