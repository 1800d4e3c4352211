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

import json
import math
import pathlib

import pytest

import parablock

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def load(name):
    return (CONFIGS / name).read_text()


def test_lr_gate():
    assert parablock.lr_feasible(1.0, 0.01, 1, 1.0)["ok"]
    bad = parablock.lr_feasible(1.0, 0.1, 1, 1.0)
    assert not bad["ok"] and not bad["local_ok"] and bad["global_ok"]
    assert len(bad["violations"]) == 1


def test_bound_terms():
    t = parablock.theorem1_terms(eta=1, eta_l=0.005, T=100, K=2, N=4, L=1,
                                 sigma=1, sigma_g=1, F=1)
    assert t["optimization"] == pytest.approx(8.0)
    assert t["total"] == pytest.approx(8.0299298)
    assert parablock.theorem1_rhs(eta=1, eta_l=0.01, T=100, K=1, N=1, L=1,
                                  sigma=0, sigma_g=0, F=0) == 0.0


def test_corollary_schedule():
    s = parablock.corollary_schedule(100, 1, 1, 0.001)
    assert s["eta"] == 1.0 and s["halvings"] == 0
    assert s["eta_l"] == pytest.approx(0.1)


def test_topk():
    idx, val = parablock.topk_compress([0.5, -3.0, 1.0, 0.2], 0.5)
    assert idx == [1, 2] and val == [-3.0, 1.0]
    assert parablock.topk_count(10, 0.25) == 3
    with pytest.raises(parablock.ConfigError):
        parablock.topk_compress([1.0], 0.0)


def test_round_times():
    assert parablock.round_time_singlethread([10], [3], [3]) == 16.0
    assert parablock.round_time_parallel([10], [3], [3]) == 10.0


def test_run_is_deterministic():
    text = load("minimal_quadratic.json")
    a = parablock.run(text)
    b = parablock.run(text)
    assert a["theta_final"] == b["theta_final"]
    assert len(a["traces"]) == 40
    assert a["summary"]["engine"] == "parablock"
    assert all(1 <= blk <= 4 for blk in a["schedule"])
    assert a["traces"][-1]["cum_wall"] <= a["summary"]["total_wall"]


def test_overlap_beats_synchronous():
    text = load("minimal_quadratic.json")
    para = parablock.run(text)["summary"]["total_wall"]
    sync = parablock.run(text, engine="fedbcd")["summary"]["total_wall"]
    assert para < sync


def test_check_and_fault():
    text = load("staleness2_sampled.json")
    assert parablock.check(text)["ok"]
    bad = parablock.check(load("minimal_quadratic.json"), fault_round=5,
                          fault_client=2)
    assert not bad["ok"]
    v = bad["first_violation"]
    assert v["round"] == 5 and v["client"] == 2
    assert "round 5" in v["description"]


def test_gradcheck():
    cases = parablock.gradcheck(seed=3, points=4)
    assert {c["kind"] for c in cases} == {"quadratic", "logistic", "mlp"}
    assert max(c["rel_error"] for c in cases) <= 1e-5


def test_config_error_names_field():
    cfg = json.loads(load("minimal_quadratic.json"))
    cfg["roundz"] = 3
    with pytest.raises(parablock.ConfigError, match="roundz"):
        parablock.run(json.dumps(cfg))
    assert issubclass(parablock.ConfigError, parablock.Error)


def test_numeric_error():
    cfg = json.loads(load("minimal_quadratic.json"))
    cfg["optimizer"]["eta_l"] = 1e150
    cfg["init"]["scale"] = 1e200
    with pytest.raises(parablock.NumericError):
        parablock.run(json.dumps(cfg))
    assert math.isfinite(parablock.run(load("minimal_quadratic.json"))
                         ["summary"]["final_loss"])
