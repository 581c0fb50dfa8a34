"""Smoke test for the `tdff` extension module.

Build and install with `pip install ./crates/python` (needs maturin), or put a
renamed `libtdff.so` from `cargo build -p tdff-python --features
extension-module` on PYTHONPATH as `tdff.so`.
"""

import math
import os
import sys
import tempfile

import tdff


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    v = tdff.l2_normalize([3.0, 4.0])
    assert close(v[0], 0.6) and close(v[1], 0.8), v

    fused = tdff.concat_streams([[1.0, 0.0], [0.0, 0.0, 1.0]], [2, 3])
    assert fused == [1.0, 0.0, 0.0, 0.0, 1.0], fused

    pooled = tdff.pool_video([[1.0, 0.0], [0.0, 1.0]])
    assert close(pooled[0], 1 / math.sqrt(2)), pooled

    lp, ln = tdff.class_weights(1, 999, 1.0)
    assert close(lp, 500.0) and close(ln, 1000 / 1998), (lp, ln)

    model = tdff.train_svm([[1.0, 0.0]], [[-1.0, 0.0]], c=1.0, owner_template="t1")
    assert model.owner_template == "t1"
    assert model.decision_value([1.0, 0.0]) > 0 > model.decision_value([-1.0, 0.0])
    other = tdff.SvmModel([0.0, 1.0], 0.5, "t2")
    s = tdff.oss_score(model, other, [1.0, 0.0], [0.0, 1.0])
    want = 0.5 * model.decision_value([0.0, 1.0]) + 0.5 * other.decision_value([1.0, 0.0])
    assert close(s, want), (s, want)

    assert close(tdff.fuse_scores([1.0, 2.0, 3.0]), 2.0)
    assert tdff.fuse_scores([1.0, 2.0, 3.0], beta=10.0) > 2.9
    pair = tdff.score_template_pair([[1.0, 0.0]], [[0.0, 1.0]], model, other)
    assert close(pair, s)

    ((_, tar),) = tdff.tar_at_far([0.9, 0.8, 0.7], [0.1, 0.2, 0.3, 0.75], [0.2])
    assert tar == 2 / 3, tar

    gallery = {"g1": "a", "g2": "b"}
    truth = {"p1": "a", "p2": "b", "p3": "x"}
    scores = {
        "p1": [("g1", 0.9), ("g2", 0.1)],
        "p2": [("g1", 0.6), ("g2", 0.4)],
        "p3": [("g1", 0.2), ("g2", 0.3)],
    }
    closed = {k: v for k, v in scores.items() if k != "p3"}
    assert tdff.cmc_curve(closed, truth, gallery, 2) == [0.5, 1.0]
    ((_, tpir),) = tdff.open_set_metrics(scores, truth, gallery, [1.0])
    assert tpir == 0.5, tpir

    agg = tdff.aggregate_splits([{"tar": 0.9}, {"tar": 1.1}])
    assert close(agg["tar"][0], 1.0) and close(agg["tar"][1], math.sqrt(0.02))

    rows, features = tdff.generate_synthetic(6, 4, 2, 8, 0.2, seed=3)
    assert rows and len(features) == len({r[2] for r in rows})

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "f.tdff")
        tdff.write_feature_file(path, {"a": [0.5, 0.25]}, 2)
        dim, back = tdff.read_feature_file(path)
        assert dim == 2 and back == {"a": [0.5, 0.25]}

        config = os.path.join(tmp, "run.toml")
        with open(config, "w") as f:
            f.write(
                '[data]\nmetadata = "m.csv"\n'
                'streams = [{ name = "A", dim = 16, path = "a.tdff" }]\n'
                '[output]\ndir = "out"\n'
            )
        rows, features = tdff.generate_synthetic(12, 6, 3, 16, 0.2, seed=1)
        with open(os.path.join(tmp, "m.csv"), "w") as f:
            f.write("template_id,subject_id,media_id,kind,video_id,split_role,split_id\n")
            for r in rows:
                f.write(",".join(str(x) for x in r) + "\n")
        tdff.write_feature_file(os.path.join(tmp, "a.tdff"), features, 16)
        report = tdff.run_pipeline(config, threads=2)
        assert "verification.tar@far=0.01" in report, sorted(report)
        assert os.path.exists(os.path.join(tmp, "out", "report.json"))

    try:
        tdff.l2_normalize([0.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("zero vector accepted")

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
