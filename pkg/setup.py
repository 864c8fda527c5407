"""Build the optional compiled kernel extension.

The package works without it (pure-python fallback selected at import), so a
failed cythonize/compile must not break installation.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "randbc._kernels",
                ["src/randbc/_kernels.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
