"""Build script: compiles the optional simulation kernel.

The kernel is a plain Cython extension with no external C dependencies.
If Cython or a C compiler is unavailable the package installs anyway and
falls back to the pure-Python engine at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "sotea._kernel",
                sources=["src/sotea/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
