from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: the pure-Python kernel is used
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "jjfab.filmgrowth._kernel",
                ["src/jjfab/filmgrowth/_kernel.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
