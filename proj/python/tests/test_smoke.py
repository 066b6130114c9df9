import json
import math

import numpy as np
import pytest

import jdan


def linear_model(raw_corr, bounds=((0.0, 1.0), (0.0, 1.0))):
    # Zero raw weights on a linear {1, 1, 1} net give a uniform marginal.
    marginal = {"layer_sizes": [1, 1, 1], "activation": "linear", "weights": [[0.0], [0.0]], "biases": [[0.0], [0.0]]}
    doc = {
        "version": "jdan-v1",
        "dim": len(bounds),
        "bounds": [{"lower": lo, "upper": hi} for lo, hi in bounds],
        "marginals": [marginal] * len(bounds),
        "correlations": {"raw": list(raw_corr)},
    }
    return json.dumps(doc)


def fgm_density(c, u, v):
    return 1.0 + c * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)


def test_uniform_marginals_give_fgm_density():
    raw = math.atanh(0.5)
    model = jdan.JointModel.from_json(linear_model([raw]))
    assert model.dim == 2
    assert model.correlations == pytest.approx([0.5])
    pts = np.array([[0.1, 0.2], [0.5, 0.5], [0.9, 0.3]])
    expected = [fgm_density(0.5, u, v) for u, v in pts]
    assert model.pdf(pts) == pytest.approx(expected, abs=1e-12)
    assert model.pdf(pts[0]) == pytest.approx(expected[0], abs=1e-12)


def test_cdf_matches_closed_form():
    model = jdan.JointModel.from_json(linear_model([math.atanh(-0.4)]))
    u, v = 0.3, 0.8
    assert model.cdf([u, v]) == pytest.approx(u * v * (1.0 - 0.4 * (1 - u) * (1 - v)), abs=1e-12)
    assert jdan.copula_cdf(2, [math.atanh(-0.4)], [u, v]) == pytest.approx(model.cdf([u, v]), abs=1e-12)


def test_bounds_rescale_density():
    model = jdan.JointModel.from_json(linear_model([0.0], bounds=((0.0, 2.0), (-1.0, 3.0))))
    assert model.pdf([1.0, 0.0]) == pytest.approx(1.0 / 8.0, abs=1e-12)
    assert model.pdf([2.5, 0.0]) == 0.0
    assert [b.upper for b in model.bounds] == [2.0, 3.0]


def test_sampling_is_deterministic_and_in_bounds():
    model = jdan.JointModel.from_json(linear_model([math.atanh(0.9)]))
    a = model.sample(4000, seed=3)
    b = model.sample(4000, seed=3)
    assert a.shape == (4000, 2)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0
    # Pearson correlation of the FGM copula with uniform margins is C / 3.
    r = np.corrcoef(a.T)[0, 1]
    assert abs(r - 0.3) < 0.06


def test_verify_passes_on_valid_model():
    model = jdan.JointModel.from_json(linear_model([0.7]))
    report = model.verify("quick")
    assert report["ok"]
    assert all(c["passed"] for c in report["checks"])


def test_round_trip_through_file(tmp_path):
    text = linear_model([0.3])
    path = tmp_path / "model.json"
    path.write_text(text)
    forecaster = jdan.load_model(str(path))
    assert not forecaster.conditional
    assert forecaster.dim == 2
    model = forecaster.model_for()
    assert model.pdf([0.25, 0.75]) == pytest.approx(fgm_density(math.tanh(0.3), 0.25, 0.75), abs=1e-12)


def test_evaluate_on_independent_uniform_data():
    model = jdan.JointModel.from_json(linear_model([0.0]))
    forecaster = jdan.Forecaster(model)
    y = model.sample(500, seed=1)
    report = forecaster.evaluate(np.zeros((500, 0)), y, samples=50)
    assert report["n_evaluated"] == 500
    # The density is 1 everywhere, so the log score is 0.
    assert report["log_score"] == pytest.approx(0.0, abs=1e-9)
    # Expected CRPS of a uniform forecast against uniform outcomes is 1/6.
    assert report["crps"] == pytest.approx([1.0 / 6.0] * 2, abs=0.02)


def test_witness_search_trichotomy():
    found = jdan.find_negative_witness("sigmoid", seed=0, max_trials=1000)
    assert found["witness"] is not None
    assert found["witness"]["value"] < 0.0
    assert 1 <= found["witness"]["trial"] == found["trials_run"]
    none = jdan.find_negative_witness("linear", seed=0, max_trials=500)
    assert none["witness"] is None and none["trials_run"] == 500


def test_errors_map_to_python_exceptions():
    model = jdan.JointModel.from_json(linear_model([0.0]))
    with pytest.raises(jdan.ContractError):
        model.pdf([0.1, 0.2, 0.3])
    with pytest.raises(jdan.ConfigError):
        jdan.JointModel.from_json(json.dumps({"version": "jdan-v0"}))
    with pytest.raises(jdan.JdanError):
        jdan.load_model("/nonexistent/model.json")
    assert issubclass(jdan.ContractError, RuntimeError)
