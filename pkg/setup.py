"""Build script for the optional compiled kernel.

The package is pure Python except for mutreduce._kernels._core, a small
Cython extension holding the hot loops (greedy test selection and kill
counting). If Cython or a C compiler is unavailable the build falls back
to the pure-Python kernel selected at import time; nothing else changes.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mutreduce._kernels._core",
                ["src/mutreduce/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
