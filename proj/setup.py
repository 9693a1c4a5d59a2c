# Copyright 2025 The PEPForge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import glob
import subprocess

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include_dirs():
    try:
        flags = subprocess.check_output(
            ["pkg-config", "--cflags-only-I", "eigen3"], text=True
        )
        return [flag[2:] for flag in flags.split()]
    except (OSError, subprocess.CalledProcessError):
        return ["/usr/include/eigen3"]


ext = Pybind11Extension(
    "pepforge._core",
    sources=sorted(glob.glob("src/*.cpp")),
    include_dirs=["include", "vendor"] + eigen_include_dirs(),
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
