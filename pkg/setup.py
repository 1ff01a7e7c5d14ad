"""Build the optional Cython trajectory kernels.

If Cython or a C compiler is unavailable the package still installs and
falls back to the numpy kernels in ``seplind._pykernels``.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SEPLIND_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "seplind._kernels",
                    ["src/seplind/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives=dict(
                language_level=3,
                boundscheck=False,
                wraparound=False,
                cdivision=True,
                initializedcheck=False,
            ),
        )

setup(ext_modules=ext_modules)
