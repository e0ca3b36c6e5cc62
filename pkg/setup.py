"""Build script: compiles the optional convolution kernels.

The compiled extension is a speedup only; the package falls back to the
numpy backend in scenesynth.kernels when the extension is missing, so a
failed cythonize must never break the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "scenesynth.kernels._convops",
                ["src/scenesynth/kernels/_convops.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"scenesynth: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
