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

"""Certified worst-case bounds and step-size design for fixed-step
first-order methods.

Problem documents, certificates and design reports are plain dicts with
the same field names the ``pepforge`` CLI reads and writes, so artifacts
move freely between the two front ends.
"""

from pepforge._core import (
    SolverFailure,
    UnsupportedSpec,
    __version__,
    analyze,
    design,
    fit_rate,
    landscape,
    sweep,
    verify,
)

__all__ = [
    "SolverFailure",
    "UnsupportedSpec",
    "__version__",
    "analyze",
    "design",
    "fit_rate",
    "landscape",
    "sweep",
    "verify",
]
