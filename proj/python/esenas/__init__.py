# Copyright 2026 The ES-ENAS Authors.
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

"""ES-ENAS: joint evolution-strategies weight training and combinatorial
architecture search."""

from esenas._esenas import (
    accounting_table,
    circulant_expand,
    enumerate_oracle,
    es_gradient,
    gaussian_vector,
    hybrid_objective,
    mix_seeds,
    param_accounting,
    run,
    run_seed,
    sample_genome,
    space_hash,
    toeplitz_expand,
    weight_update,
)

__all__ = [
    "accounting_table",
    "circulant_expand",
    "enumerate_oracle",
    "es_gradient",
    "gaussian_vector",
    "hybrid_objective",
    "mix_seeds",
    "param_accounting",
    "run",
    "run_seed",
    "sample_genome",
    "space_hash",
    "toeplitz_expand",
    "weight_update",
]
