import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mallsim.svp._visibility_cy",
                ["src/mallsim/svp/_visibility_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # No Cython available: the package falls back to the pure-Python kernel.
    ext_modules = []

setup(ext_modules=ext_modules)
