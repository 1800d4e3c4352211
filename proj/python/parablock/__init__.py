# Copyright 2026 The ParaBlock Lab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the ParaBlock federated block-coordinate lab."""

from parablock._core import (
    ConfigError,
    Error,
    NumericError,
    check,
    corollary_schedule,
    gradcheck,
    lr_feasible,
    round_time_parallel,
    round_time_singlethread,
    run,
    theorem1_rhs,
    theorem1_terms,
    topk_compress,
    topk_count,
)

__all__ = [
    "ConfigError",
    "Error",
    "NumericError",
    "check",
    "corollary_schedule",
    "gradcheck",
    "lr_feasible",
    "round_time_parallel",
    "round_time_singlethread",
    "run",
    "theorem1_rhs",
    "theorem1_terms",
    "topk_compress",
    "topk_count",
]
