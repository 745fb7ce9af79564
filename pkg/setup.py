import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "baecv.fem._kernels_cy",
                ["src/baecv/fem/_kernels_cy.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback kernels are selected at import time.
    extensions = []

setup(ext_modules=extensions)
