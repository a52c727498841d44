"""Build the optional compiled kernels.

If Cython or a C compiler is missing the package still installs and the
numpy fallback in ``mixsim.kernels._pykernels`` is used at import.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mixsim.kernels._ckernels",
                ["src/mixsim/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
