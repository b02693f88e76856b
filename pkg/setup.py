import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("pathcvx._kernels", ["src/pathcvx/_kernels.pyx"],
                   include_dirs=[numpy.get_include()])],
        language_level=3,
    )
except ImportError:
    # pure fallback install; the numpy kernel twins are selected at import
    ext_modules = []

setup(ext_modules=ext_modules)
