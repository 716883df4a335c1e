import json
import math

import pytest

import msaw


def small_spec(seed=3):
    spec = msaw.DriftSpec()
    spec.n_features = 5
    spec.n_sources = 2
    spec.instances_per_season = 800
    spec.prevalence = 0.1
    spec.seed = seed
    return spec


def test_penalty_factor_spot_values():
    alpha = math.log2(10)
    assert msaw.penalty_factor(1, alpha) == pytest.approx(0.2314, abs=1e-3)
    assert msaw.penalty_factor(10_000, alpha) == pytest.approx(0.9678, abs=1e-3)


def test_hand_trace():
    cfg = msaw.MsawConfig(alpha=2.0, beta=0.5)
    state = msaw.EnsembleState.initial(1, cfg)
    prob, normalized, state = msaw.msaw_step(state, [0.9], 0.2, True)
    assert [math.exp(w) for w in normalized] == pytest.approx([2 / 3, 1 / 3], abs=1e-15)
    assert state.weights() == pytest.approx([2 / 3, 1 / 9], abs=1e-15)
    assert prob == pytest.approx(2 / 3 * 0.9 + 1 / 3 * 0.2)


def test_naive_bayes_posterior():
    schema = msaw.Schema([msaw.FeatureDef("f", ["P", "N"])], "y", "1")
    data = [msaw.Instance([0], True)] * 3 + [msaw.Instance([1], True)]
    data += [msaw.Instance([0], False)] + [msaw.Instance([1], False)] * 5
    model = msaw.fit_batch(schema, data)
    # (5/12 * 4/7) / (5/12 * 4/7 + 7/12 * 2/9)
    assert model.predict_proba(msaw.Instance([0])) == pytest.approx(0.6475, abs=1e-3)
    incremental = msaw.NaiveBayes(schema)
    for x in data:
        incremental.update(x)
    assert incremental == model
    assert msaw.NaiveBayes.from_json(model.to_json()) == model


def test_auroc_and_delong():
    assert msaw.auroc([0.9, 0.4, 0.5, 0.1, 0.3], [True, True, False, False, False]) == pytest.approx(5 / 6)
    z, p = msaw.delong_test([0.9, 0.4, 0.5, 0.1], [0.9, 0.4, 0.5, 0.1], [True, True, False, False])
    assert (z, p) == (0.0, 1.0)
    with pytest.raises(msaw.DataError):
        msaw.auroc([0.1, 0.2], [True, True])


def test_static_weights():
    assert msaw.static_weights("equal", [], 4) == pytest.approx([0.25] * 4)
    assert msaw.static_weights("time", [1, 2], 2) == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(msaw.ConfigError):
        msaw.static_weights("nope", [], 2)


def test_generate_is_deterministic():
    a = msaw.generate(small_spec())
    b = msaw.generate(small_spec())
    assert [s.season_id for s in a.seasons] == ["2017-2018", "2018-2019", "2019-2020"]
    assert a.seasons[-1].is_target
    assert [x.values for x in a.seasons[0].instances] == [x.values for x in b.seasons[0].instances]


def test_gen_and_run(tmp_path):
    summary = msaw.gen(small_spec(), tmp_path / "data")
    assert summary.startswith("seed 3")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"data_dir": "data", "output_dir": "out", "methods": ["equal", "time", "msaw"]}))
    text = msaw.run(config)
    assert "msaw" in text
    metrics = json.loads((tmp_path / "out" / "metrics.json").read_text())
    assert [m["method"] for m in metrics] == ["equal", "time", "msaw"]
    reports = msaw.run_reports(config)
    assert reports[2]["auroc"] == metrics[2]["auroc"]
    assert "msaw" in reports[0]["delong_vs"]


def test_errors_surface_as_exceptions(tmp_path):
    spec = small_spec()
    spec.prevalence = 1.5
    with pytest.raises(msaw.ConfigError):
        msaw.generate(spec)
    with pytest.raises(msaw.SchemaError):
        msaw.parse_schema('{"label": ')
