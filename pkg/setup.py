"""Build script: compiles the Monte Carlo step kernel as a C extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed cythonize never blocks a pure-Python install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sirbass._kernels._step_cy",
                ["src/sirbass/_kernels/_step_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
