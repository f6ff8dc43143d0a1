# Copyright 2026 The byzfed Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Byzantine-resilient private federated learning simulator."""

import json

from ._byzfed import (
    MODULUS,
    ByzfedError,
    assign,
    calibrate_sigma2,
    config_text,
    decode,
    dp_from_rdp,
    encode,
    field_add,
    include,
    inclusion_bound,
    presets,
    run_json,
    shamir_recover,
    shamir_share,
)


def run(preset=None, config=None, seed=None, out_dir=""):
    """Runs one experiment and returns its summary as a dict."""
    return json.loads(run_json(preset=preset, config=config, seed=seed, out_dir=str(out_dir)))


__all__ = [
    "MODULUS",
    "ByzfedError",
    "assign",
    "calibrate_sigma2",
    "config_text",
    "decode",
    "dp_from_rdp",
    "encode",
    "field_add",
    "include",
    "inclusion_bound",
    "presets",
    "run",
    "run_json",
    "shamir_recover",
    "shamir_share",
]
