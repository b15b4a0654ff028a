"""Build script for the optional compiled hull-query kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a missing Cython toolchain degrades the build instead of
failing it.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "crosspoly._hull._fwcore",
                ["src/crosspoly/_hull/_fwcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
