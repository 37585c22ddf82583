"""Builds the optional Cython training kernel.

If the extension cannot be built the package still works: the learner
falls back to the pure numpy/scipy implementation at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dermpath._kernel._softmax_fast",
                ["src/dermpath/_kernel/_softmax_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
