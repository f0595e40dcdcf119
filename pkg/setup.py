import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "neumannlab.kernels._fast",
                ["src/neumannlab/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # No Cython: install pure-Python only; the kernel shim falls back at import.
    ext_modules = []

setup(ext_modules=ext_modules)
