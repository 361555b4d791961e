"""Build script for the compiled walk kernels.

python setup.py build_ext --inplace   # drop the .so next to the sources

The package works without the extension (pure-numpy fallback); the
extension just makes the per-trial Monte Carlo loops much faster.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "walklab.backends._corekernels",
                ["src/walklab/backends/_corekernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
