"""Build script for the optional compiled penalty kernel.

The package works without the extension (a numpy fallback is selected at
import); building it just makes the hot quadrature loop faster.
"""

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/perchplan/_core.pyx",
        compiler_directives={"language_level": 3},
    )
    for ext in ext_modules:
        ext.include_dirs.append(np.get_include())
        ext.extra_compile_args = ["-O3"]
        ext.define_macros = [("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")]
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
