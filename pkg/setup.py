"""Build script for the optional compiled ray-casting kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes rendering much faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "artmanip._kernels._raycast",
                ["src/artmanip/_kernels/_raycast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
