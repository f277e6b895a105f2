# Copyright 2026 The collapse-lab Authors
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

"""Python bindings for the collapse-lab simulation core."""

import json as _json

from ._core import (
    CascadeState,
    CollapseError,
    CounterRng,
    born_rule_frequencies,
    cascade_closed_form,
    cascade_integrate,
    coherence_norm,
    fokker_planck_absorbed,
    joint_weights,
    partial_trace,
    philox4x32,
    run_decoherence,
    set_workers,
    tensor_product,
    worker_count,
)
from ._core import presets as _presets
from ._core import run_experiment as _run_experiment

__all__ = [
    "CascadeState",
    "CollapseError",
    "CounterRng",
    "born_rule_frequencies",
    "cascade_closed_form",
    "cascade_integrate",
    "coherence_norm",
    "fokker_planck_absorbed",
    "joint_weights",
    "partial_trace",
    "philox4x32",
    "presets",
    "run_decoherence",
    "run_experiment",
    "set_workers",
    "tensor_product",
    "worker_count",
]


def presets():
    """Built-in presets as {name: config dict}."""
    return {name: _json.loads(text) for name, text in _presets().items()}


def run_experiment(config, strict=False):
    """Run a config (dict or JSON string) and return the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_experiment(text, strict))
