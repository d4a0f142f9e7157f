from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The package works without the compiled kernels (NumPy fallback at import).
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "zerolab._kernels",
                ["src/zerolab/_kernels.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
