"""Build the optional compiled quadrature core.

The extension is optional: if Cython or a C compiler is missing the package
installs without it and ``wavecrest.kernels`` falls back to numpy.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("WAVECREST_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "wavecrest._kernels",
                    ["src/wavecrest/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
