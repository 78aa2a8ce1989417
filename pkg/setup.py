"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension: cascadelab.kernels
falls back to the numpy reference implementation when ``_cy`` is missing,
so the extension is marked optional and a failed compile is not fatal.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - source-only install without Cython
    ext_modules = []
else:
    extensions = [
        Extension(
            "cascadelab.kernels._cy",
            ["src/cascadelab/kernels/_cy.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ]
    for ext in extensions:
        ext.optional = True
    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
