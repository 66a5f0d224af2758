"""Build script.

The compiled stepper in perihelion/_fast.pyx is optional: when Cython or a C
compiler is unavailable (or PERIHELION_NO_EXT=1 is set) the package installs
pure Python and perihelion.integrate falls back to the interpreted stepper.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("PERIHELION_NO_EXT") and os.path.exists("src/perihelion/_fast.pyx"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "perihelion._fast",
                    ["src/perihelion/_fast.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
