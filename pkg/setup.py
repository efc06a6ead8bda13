"""Build script for the optional compiled kernel core.

The package is pure Python; the Cython extension only accelerates the
GF(q) inner loops. If Cython or a C compiler is unavailable, set
SMBMM_SKIP_EXT=1 (or let the build fail through) and the package falls
back to the pure-Python kernels at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SMBMM_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/smbmm/_kernels/_fastcore.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
