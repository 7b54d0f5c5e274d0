"""Build script for the optional compiled coverage-bitset kernel.

The package works without the extension (a pure-Python kernel is selected
at import time); the extension only accelerates the hot selection loops.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fuzzsmith.kernels._bitset",
                ["src/fuzzsmith/kernels/_bitset.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
