import os

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The C distribution functions (ziggurat normal/exponential) live in numpy's
# static helper library; extensions sampling through bitgen_t must link it.
numpy_random_lib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

extensions = [
    Extension(
        "superbm._speedups",
        ["src/superbm/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[numpy_random_lib],
        libraries=["npyrandom"],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
