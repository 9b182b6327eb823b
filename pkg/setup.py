"""Build hooks for the optional compiled backend.

The package is pure Python plus one Cython extension, rtcur._backend._core.
If Cython is unavailable the build still succeeds and the package falls back
to the numpy kernel implementations at import time.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rtcur._backend._core",
                ["src/rtcur/_backend/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
