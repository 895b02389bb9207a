"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so the build degrades gracefully when Cython is missing.
"""

from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "pire._kernels",
                sources=["src/pire/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
