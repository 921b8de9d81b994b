"""Build the optional compiled kernels.

The extension is optional: if Cython or a C compiler is missing the package
installs pure-Python and ``confvote._backend`` falls back to ``_pykernels``.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CONFVOTE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "confvote._ckernels",
                    ["src/confvote/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no FMA contraction / fast-math: must match the Python backend bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
