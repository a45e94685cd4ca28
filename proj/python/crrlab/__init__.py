# Copyright 2026 The crrlab Authors.
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

"""Python bindings for the crrlab C++ core."""

from crrlab._core import (
    ConfigError,
    DataError,
    Error,
    Model,
    NumericError,
    ParseError,
    ValidationError,
    accuracy,
    crr_loss,
    divergence,
    load_dataset,
    macro_f1,
    run_command,
    simulate,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "Model",
    "NumericError",
    "ParseError",
    "ValidationError",
    "accuracy",
    "crr_loss",
    "divergence",
    "load_dataset",
    "macro_f1",
    "run_command",
    "simulate",
    "tokenize",
]
