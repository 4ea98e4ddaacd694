"""Build script: compiles the optional equality-classes kernel.

The package works without the compiled extension (a pure-Python twin is
selected at import time), so any failure to cythonize or compile is
non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/satchase/_eqcore.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"satchase: skipping compiled kernel ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
