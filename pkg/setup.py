import numpy as np
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "anisofrac._fastkern",
                ["src/anisofrac/_fastkern.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython: install pure-Python only; anisofrac.backend falls back at import.
    ext_modules = []

setup(ext_modules=ext_modules)
