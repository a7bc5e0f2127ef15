import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "expsqlab._kernels",
                ["src/expsqlab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # keep bit-parity with the numpy fallback: no FMA contraction
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
    # the compiled core is an accelerator; the package must still install
    # on toolchain-less hosts and fall back to the numpy kernels
    for ext in extensions:
        ext.optional = True
else:
    extensions = []

setup(ext_modules=extensions)
