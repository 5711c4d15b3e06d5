"""Build hook for the optional compiled matching kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); building it just makes subgraph matching faster.
"""

from setuptools import Extension, setup

extensions = []
try:
    from Cython.Build import cythonize

    ext = Extension("efmct._matchcore_cy", ["src/efmct/_matchcore_cy.pyx"])
    ext.optional = True
    extensions = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=extensions)
