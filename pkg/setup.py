"""Build script: compiles the hot-loop kernels as a C extension when possible.

The package works without the extension (a pure-Python twin of every kernel
ships in wdyn._kernels_py), but training at realistic sizes wants the compiled
backend.  -ffp-contract=off keeps the compiled kernels bit-identical to the
pure-Python ones (no FMA contraction).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "wdyn._kernels_c",
                ["src/wdyn/_kernels_c.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
