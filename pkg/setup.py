"""Builds the compiled canonical labeling kernel when Cython is available."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SHRINKCHECK_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(["src/shrinkcheck/tensor/_canon.pyx"], language_level=3, quiet=True)
    except ImportError:
        pass

setup(ext_modules=ext_modules)
