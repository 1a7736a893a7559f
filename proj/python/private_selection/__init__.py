# Copyright 2026 The Private Selection Authors
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

"""Private selection from private candidates."""

import json

from . import _core

__all__ = [
    "softmax_probabilities",
    "threshold_distribution",
    "random_stop_distribution",
    "threshold_samples",
    "max_divergence",
    "delta_divergence",
    "naive_max_check",
    "derive_extended_params",
    "derive_find_threshold_params",
    "run_command",
]

softmax_probabilities = _core.softmax_probabilities
threshold_samples = _core.threshold_samples
max_divergence = _core.max_divergence
delta_divergence = _core.delta_divergence


def threshold_distribution(scores, probs, tau, gamma, eps0):
    """Exact output law of threshold selection on one candidate."""
    return json.loads(_core.threshold_distribution(scores, probs, tau, gamma, eps0))


def random_stop_distribution(scores, probs, gamma, max_iterations=None):
    """Exact output law of random stopping on one candidate."""
    return json.loads(
        _core.random_stop_distribution(scores, probs, gamma, max_iterations))


def naive_max_check(rivals, eps, balanced=False):
    return json.loads(_core.naive_max_check(rivals, eps, balanced))


def derive_extended_params(horizon, delta, eps0, eps1, eps3, beta, p_star):
    return json.loads(
        _core.derive_extended_params(horizon, delta, eps0, eps1, eps3, beta,
                                     p_star))


def derive_find_threshold_params(rounds, delta, eps0, eps1, eps3, beta, p_star):
    return json.loads(
        _core.derive_find_threshold_params(rounds, delta, eps0, eps1, eps3,
                                           beta, p_star))


def run_command(command, config=None, seed=None, trials=None, family=""):
    """Runs a tool command in process and returns its JSON report."""
    return json.loads(_core.run_command(command, config, seed, trials, family))
