from setuptools import Extension, setup

from Cython.Build import cythonize

# The compiled kernel only accelerates the descent inner loop; the package
# falls back to the pure-Python mirror when the extension is unavailable.
# -ffp-contract=off keeps C arithmetic bit-identical to CPython floats
# (no FMA contraction), which the backend-equivalence tests rely on.
extension = Extension(
    "rioulab._kernels",
    sources=["src/rioulab/_kernels.pyx"],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(
    ext_modules=cythonize([extension], compiler_directives={"language_level": 3}),
)
