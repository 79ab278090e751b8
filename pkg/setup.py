"""Build script for the optional compiled eigensolver kernel.

The package works without the extension; upcr._kernels falls back to the
pure-Python twin when the compiled module is absent.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "upcr._kernels._jacobi_cy",
                ["src/upcr/_kernels/_jacobi_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
