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

import math
import os

import pytest

import private_selection as ps

CONFIG_DIR = os.environ.get(
    "PRIVATE_SELECT_CONFIG_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "tools", "configs"))


def test_softmax_two_scores():
    p = ps.softmax_probabilities([0.0, 1.0], 1.0)
    assert p[1] == pytest.approx(math.e / (1 + math.e), abs=1e-12)
    assert sum(p) == pytest.approx(1.0, abs=1e-12)


def test_threshold_distribution_proportional():
    law = ps.threshold_distribution([0.2, 0.6, 0.9], [0.5, 0.3, 0.2],
                                    tau=0.5, gamma=0.1, eps0=0.5)
    probs = {o["score"]: o["prob"] for o in law["outcomes"]}
    assert probs[0.6] / probs[0.9] == pytest.approx(1.5, rel=1e-9)
    assert sum(probs.values()) + law["bot_prob"] == pytest.approx(1.0)


def test_random_stop_two_points():
    law = ps.random_stop_distribution([0.0, 1.0], [0.5, 0.5], gamma=0.5)
    probs = {o["score"]: o["prob"] for o in law["outcomes"]}
    assert probs[1.0] == pytest.approx(2 / 3, abs=1e-12)
    assert probs[0.0] == pytest.approx(1 / 3, abs=1e-12)


def test_threshold_samples_seeded():
    a = ps.threshold_samples([0.2, 0.9], [0.5, 0.5], 0.5, 0.1, 0.5, 100, 3)
    b = ps.threshold_samples([0.2, 0.9], [0.5, 0.5], 0.5, 0.1, 0.5, 100, 3)
    assert a == b
    assert all(x is None or x == 0.9 for x in a)


def test_divergences():
    assert ps.max_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(
        math.log(2))
    assert ps.delta_divergence([0.5, 0.5], [0.25, 0.75], 0.25) == pytest.approx(
        0.0, abs=1e-15)


def test_naive_max():
    r = ps.naive_max_check(2, 0.1)
    assert r["log_ratio"] == pytest.approx(0.2, abs=1e-12)


def test_params():
    e = ps.derive_extended_params(10, 0.1, 0.25, 0.25, 4.0, 0.2, 0.5)
    f = ps.derive_find_threshold_params(10, 0.1, 0.25, 0.25, 3.0, 0.2, 0.5)
    assert e["samples"] >= e["samples_real"]
    assert f["lipschitz"] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ps.derive_extended_params(1, 0.1, 0.5, 0.5, 1.0, 0.2, 0.5)


def test_run_command():
    r = ps.run_command("counterexample", family="naive-max-pure")
    assert r["pass"]
    audit = ps.run_command("audit",
                           config=os.path.join(CONFIG_DIR, "audit_naive_max.json"))
    assert not audit["pass"]
