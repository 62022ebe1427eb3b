"""Builds the compiled recognizer when Cython and a C++ compiler are available."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("MCC_NO_EXTENSION", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(["src/mcc/engine/_earley.pyx"], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
