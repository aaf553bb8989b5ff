"""Build script: compiles the optional Cython edit-distance kernel.

The package is fully functional without the extension (a pure-Python
twin is selected at import time), so any build failure here degrades
to the fallback instead of aborting the install.  Set
DELCERT_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DELCERT_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("delcert._editdp_cy", ["src/delcert/_editdp_cy.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
