"""Build script for the optional compiled flux kernel.

The package is fully functional without the extension (a pure-NumPy
fallback is selected at import time), so a failed compilation downgrades
to a warning instead of aborting the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "wfr_split_lab._cc_kernel",
                ["src/wfr_split_lab/_cc_kernel.pyx"],
                include_dirs=[np.get_include()],
                # keep the compiled kernel bit-compatible with the NumPy path:
                # no FMA contraction, strict IEEE ordering
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"wfr-split-lab: skipping compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
