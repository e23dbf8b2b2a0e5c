"""Smoke test for the repairlab_py extension.

Build the module first, either with `maturin develop -m crates/python/Cargo.toml`
or with cargo, copying the shared library next to this script:

    cargo build --release -p repairlab-py --features extension-module
    cp target/release/librepairlab_py.so python/repairlab_py.so
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import repairlab_py as rl


def main():
    data = rl.Dataset.generate()
    assert len(data) == 1000
    assert "proxy" in data.columns()
    before = rl.disparate_impact(data.labels(), data.groups())
    assert before["disparate_impact_ratio"] < 1.0

    repaired, plan = rl.massage(data)
    assert plan["m"] == rl.flip_count(data) == len(plan["promotions"]) == len(plan["demotions"])
    after = rl.disparate_impact(repaired.labels(), repaired.groups())
    assert abs(after["statistical_parity_difference"]) < abs(before["statistical_parity_difference"])

    model = rl.train(data)
    scores = model.predict(data)
    assert len(scores) == len(data) and all(0.0 <= s <= 1.0 for s in scores)
    clone = rl.Model.from_json(model.to_json())
    assert clone.predict(data) == scores

    plain = [s >= 0.5 for s in scores]
    decisions, flagged = rl.reject_option(scores, data.groups(), 0.0)
    assert decisions == plain and not any(flagged)
    decisions, flagged = rl.ensemble_disagreement([[True], [False], [True]], [True])
    assert decisions == [False] and flagged == [True]

    pr = rl.train(data, json.dumps({"kind": "prejudice_remover", "prejudice": {"eta": 5.0}}))
    assert len(pr.predict(data)) == len(data)

    fixed, info = rl.optimize(data, ["proxy"], json.dumps({"epsilon": 0.05, "distortion_budget": 0.5}), seed=3)
    assert info["check_passed"] and len(fixed) == len(data)

    numeric = rl.Dataset.generate(n_rows=300, numeric_features=2)
    grown = rl.smote(numeric, privileged=False, favorable=True, seed=1)
    assert len(grown) > len(numeric)

    small = rl.Dataset.generate(n_rows=200)
    small_fixed, _ = rl.massage(small)
    findings, summary = rl.audit(small, small_fixed, k=5)
    assert summary["count"] == len(findings) == 200
    assert 0.0 <= summary["mean_flip_rate"] <= 1.0

    routed = rl.simulate(small, rl.train(small), consent_rate=0.7, ai_fraction_cap=0.5, seed=4)
    s = routed["summary"]
    assert s["human_workload"] == s["non_consent"] + s["overflow"] + s["ai_negative"]
    assert routed["blindness"]["passed"]

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "data.csv")
        small.to_csv(path)
        assert os.path.getsize(path) > 0

    config = """
seed = 2
[data.generate]
n_rows = 400
base_positive_rate = 0.6
bias_strength = 0.3
proxy_correlation = 0.8
noise_features = 2
seed = 7
[train]
kind = "logistic"
[postprocess]
kind = "reject_option"
theta = 0.1
"""
    report = rl.run_pipeline(config)
    assert report["stages"][-1] == "metrics" and report["knobs"]["theta"] == 0.1
    rows = rl.compare(config + '[[sweep]]\nname = "a"\n[[sweep]]\nname = "b"\npreprocess = { kind = "massage" }\n')
    assert [r["stack"] for r in rows] == ["a", "b"]

    try:
        rl.run_pipeline("[data]\nbogus = 1\n")
    except ValueError as e:
        assert "bogus" in str(e)
    else:
        raise AssertionError("bad config accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
