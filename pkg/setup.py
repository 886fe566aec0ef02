from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; gim1n falls back at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "gim1n._core",
                ["src/gim1n/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
