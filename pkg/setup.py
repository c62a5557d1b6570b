import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# No -ffast-math / -march=native: the compiled kernels must produce the exact
# IEEE double results of the pure-Python fallback. -ffp-contract=off stops gcc
# from fusing a*b+c into fma, which would change the last ulp.
ext = Extension(
    "superpix.kernels._core",
    ["src/superpix/kernels/_core.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(
    ext_modules=cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    ),
)
