"""Builds the optional compiled search kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); set REGRETKIT_SKIP_EXT=1 to skip compilation explicitly.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("REGRETKIT_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "regretkit._kernels._search_core",
                    sources=["src/regretkit/_kernels/_search_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
