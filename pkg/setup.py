"""Build script for the optional compiled block kernels.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and falls back to the NumPy kernels at import.
"""
import os

from setuptools import setup, Extension

ext_modules = []
if os.environ.get("SEFFT_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        import numpy as np

        ext_modules = cythonize(
            [
                Extension(
                    "sefftnet._kernels",
                    [os.path.join("src", "sefftnet", "_kernels.pyx")],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: summation order must match the NumPy path.
                    # -fno-trapping-math only lets the mask loops vectorise.
                    extra_compile_args=["-O3", "-fno-trapping-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
