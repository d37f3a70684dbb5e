"""Build script for the compiled protocol-sampling kernel.

The package works without the extension (a pure-Python fallback is selected
at import time); building it makes large Monte Carlo protocol runs roughly
two orders of magnitude faster.  See benchmarks/bench_protocol.py.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sptmqc._protocol_kernel",
                ["src/sptmqc/_protocol_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
