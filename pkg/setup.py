"""Build script for the optional compiled sweep kernel.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures must never break installation.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "prodnet._kernels._sweep",
                ["src/prodnet/_kernels/_sweep.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    for ext in extensions:
        ext.optional = True

setup(ext_modules=extensions)
