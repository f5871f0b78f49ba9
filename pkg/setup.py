import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("OFFTSIM_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("offtsim._butterfly", ["src/offtsim/_butterfly.pyx"],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
