"""Build script: compiles the optional message-passing kernel extension.

The package works without the extension (a pure-NumPy backend is selected
at import time), so any compilation failure downgrades to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "fsra.mpad._kernels_cy",
                ["src/fsra/mpad/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - build-environment dependent
    warnings.warn(f"Cython unavailable ({exc}); building without compiled kernels")

setup(ext_modules=ext_modules)
