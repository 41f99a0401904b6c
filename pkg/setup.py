import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    native = Extension(
        "sidaug.kernels.native",
        ["src/sidaug/kernels/native.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off: the pure-numpy backend is the reference; fused
        # multiply-adds would break bit-for-bit agreement between backends.
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([native], language_level=3)

setup(ext_modules=ext_modules)
