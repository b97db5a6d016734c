import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

eigen_include = os.environ.get("EIGEN3_INCLUDE_DIR", "/usr/include/eigen3")

core_sources = [
    "src/normal.cpp",
    "src/layout.cpp",
    "src/matrix_utils.cpp",
    "src/pom.cpp",
    "src/design.cpp",
    "src/estimator.cpp",
    "src/oracle.cpp",
    "src/simgen.cpp",
    "src/coverage.cpp",
    "src/csv.cpp",
]

ext_modules = [
    Pybind11Extension(
        "splitplot._core",
        sources=["python/bindings.cpp"] + core_sources,
        include_dirs=["include", eigen_include],
        cxx_std=20,
    )
]

setup(ext_modules=ext_modules, cmdclass={"build_ext": build_ext})
