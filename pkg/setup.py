"""Builds the optional compiled kernel for the readout-chain simulator.

The package is fully functional without it: hallab._kernels falls back to a
NumPy implementation when the extension is missing or Cython/a C compiler is
unavailable at build time.
"""

from setuptools import setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "hallab._kernels._readout_chain",
        ["src/hallab/_kernels/_readout_chain.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
