"""Build script for the optional compiled kernels.

The package works without the extension; ``hdbf.kernels`` falls back to a
pure numpy implementation when ``hdbf._kernels`` cannot be imported.
"""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HDBF_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        extensions = [
            Extension(
                "hdbf._kernels",
                ["src/hdbf/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math / -march=native: summation order must stay
                # sequential so both backends agree bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
