import numpy
from Cython.Build import cythonize
from setuptools import setup
from setuptools.extension import Extension

# The compiled kernels are an optimization, not a requirement: the package
# falls back to the numpy implementation when the extension is absent.
extensions = [
    Extension(
        "splatalloc.fitting._kernels",
        ["src/splatalloc/fitting/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
