from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "src/distribution.cpp",
    "src/spec_io.cpp",
    "src/numeric.cpp",
    "src/charfun.cpp",
    "src/criteria.cpp",
    "src/extremal.cpp",
    "src/boundary.cpp",
    "src/simulator.cpp",
    "src/selftest.cpp",
]

ext = Pybind11Extension(
    "delaystab._core",
    sources=["python/bindings.cpp", *core_sources],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_link_args=["-pthread"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
