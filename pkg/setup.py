"""Build script for the optional compiled envelope kernel.

The package is fully functional without the extension: dbl.glimpse falls
back to a scipy-based backend when the compiled module is absent.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "dbl.glimpse._envelope_fast",
        ["src/dbl/glimpse/_envelope_fast.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
