import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; sergm._fallback is used
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sergm._gibbs",
                sources=["src/sergm/_gibbs.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
