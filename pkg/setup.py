import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("QCS_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qcs.kernels._tilted",
                ["src/qcs/kernels/_tilted.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
