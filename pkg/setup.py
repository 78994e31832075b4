"""Build script for the optional compiled kernel backend.

The package works without the extension (a pure-Python backend with identical
semantics is selected at import time), so the build degrades gracefully when
Cython or a C toolchain is unavailable.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "continuumlab._ckernels",
        ["src/continuumlab/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps double arithmetic bit-identical to the
        # pure-Python backend (no fused multiply-add contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
