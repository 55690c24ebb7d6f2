"""Build hook for the optional compiled kernels.

If Cython, numpy or libmpfr are missing the package still installs and the
pure-Python fallback is used.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SCHOTTKYKIT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "schottkykit._ckernels",
                    ["src/schottkykit/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    libraries=["mpfr", "gmp"],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
