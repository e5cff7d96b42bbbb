import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    # -ffp-contract=off keeps the C arithmetic bit-identical to the numpy
    # fallback (no fused multiply-adds), which the backend parity tests rely on.
    ext_modules = cythonize(
        [
            Extension(
                "cpdlab._ckernels",
                ["src/cpdlab/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
