"""Build script for the optional compiled kernels.

The package works without the extension (a pure numpy/scipy fallback is
selected at import time); building it just makes the sliding-window Hurst
estimation and the GARCH likelihood a lot faster.  Set BULLHURST_NO_EXT=1
to skip the build entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BULLHURST_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "bullhurst._kernels._core",
                    ["src/bullhurst/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
