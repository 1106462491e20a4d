# setup.py
#
# Copyright 2026 memvoice authors
# SPDX-License-Identifier: Apache-2.0

"""Builds the _core extension through the project's CMake tree.

setuptools drives the packaging; CMake owns the actual compile so the
extension and the CLI share one build definition.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                # Packaging builds skip the test tree.
                "-DSKBUILD=ON",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPYTHON_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core",
             "--parallel"],
            check=True,
        )

        produced = sorted(build_dir.glob("_core*.so"))
        if not produced:
            raise RuntimeError(f"cmake did not produce _core in {build_dir}")
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(produced[0], target)


setup(
    ext_modules=[CMakeExtension("memvoice._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
