"""Build script for the optional compiled GF(2) kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), so a missing compiler only costs speed.
"""

from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "byzfount._kernels._gf2c",
                ["src/byzfount/_kernels/_gf2c.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
