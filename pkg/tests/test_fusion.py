"""Min-rule fusion and the stagewise hinge regression."""

import numpy as np
import pytest

from stereoqa.fusion import (MIN_RULE_BINAURAL_SCALE, MIN_RULE_MONO_SCALE,
                             Hinge, HingeModel, fit_regression, min_rule,
                             predict)


def test_min_rule_closed_form():
    for opm, binq in [(1.0, 0.0), (20.0, -50.0), (0.01, 10.0), (5.0, -400.0)]:
        fused = min_rule(opm, binq)
        expected = min(np.log10(MIN_RULE_MONO_SCALE * opm),
                       MIN_RULE_BINAURAL_SCALE * binq)
        assert fused.value == pytest.approx(expected, abs=1e-12)
        assert fused.rule == "min_rule"


def test_min_rule_component_attribution():
    # strongly negative binaural quality dominates
    fused = min_rule(100.0, -500.0)
    assert fused.value == pytest.approx(MIN_RULE_BINAURAL_SCALE * -500.0)
    # transparent binaural, poor mono: the log term dominates
    fused = min_rule(0.001, 0.0)
    assert fused.value == pytest.approx(np.log10(MIN_RULE_MONO_SCALE * 0.001))


def test_min_rule_requires_positive_opm():
    with pytest.raises(ValueError):
        min_rule(0.0, 0.0)
    with pytest.raises(ValueError):
        min_rule(-1.0, 0.0)


def test_hinge_evaluate():
    X = np.array([[0.0], [0.5], [1.0]])
    assert np.allclose(Hinge(0, +1, 0.5).evaluate(X), [0.0, 0.0, 0.5])
    assert np.allclose(Hinge(0, -1, 0.5).evaluate(X), [0.5, 0.0, 0.0])


def test_model_json_roundtrip():
    model = HingeModel(1.5, ((
        (Hinge(0, 1, 0.25),), 2.0), ((Hinge(1, -1, 0.75), Hinge(0, 1, 0.1)), -3.0)), 2)
    back = HingeModel.from_json(model.to_json())
    assert back == model
    X = np.random.default_rng(0).uniform(0, 1, (20, 2))
    assert np.allclose(model.predict(X), back.predict(X))


def test_predict_scalar_and_validation():
    model = HingeModel(0.0, (((Hinge(0, 1, 0.0),), 1.0),), 2)
    assert model.predict(np.array([2.0, 9.0])) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        model.predict(np.zeros((4, 3)))


def test_fit_recovers_single_hinge():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 200)
    knot = float(np.sort(x)[100])
    y = 1.0 + 2.5 * np.maximum(0.0, x - knot)
    model = fit_regression(x[:, None], y, max_terms=4)
    pred = model.predict(x[:, None])
    assert np.abs(pred - y).max() < 1e-8
    knots = {h.knot for hinges, _ in model.terms for h in hinges}
    assert any(abs(k - knot) < 1e-12 for k in knots)


def test_fit_linear_target_exact():
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 1, (150, 2))
    y = 3.0 - 2.0 * X[:, 0] + 0.5 * X[:, 1]
    model = fit_regression(X, y, max_terms=6)
    resid = y - model.predict(X)
    r2 = 1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)
    assert r2 > 0.999


def test_fit_deterministic():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, (120, 3))
    y = np.maximum(0, X[:, 0]) - 2 * np.maximum(0, 0.3 - X[:, 1]) \
        + 0.05 * rng.standard_normal(120)
    a = fit_regression(X, y, max_terms=6)
    b = fit_regression(X, y, max_terms=6)
    assert a == b
    assert a.to_json() == b.to_json()


def test_fit_respects_max_terms():
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, (200, 2))
    y = np.sin(3 * X[:, 0]) + np.cos(2 * X[:, 1])
    model = fit_regression(X, y, max_terms=4)
    assert len(model.terms) <= 4


def test_fit_interactions_improve_product_target():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, (300, 2))
    y = np.maximum(0, X[:, 0] - 0.4) * np.maximum(0, X[:, 1] - 0.4)
    m1 = fit_regression(X, y, max_terms=8, max_degree=1)
    m2 = fit_regression(X, y, max_terms=8, max_degree=2)
    rss1 = np.sum((y - m1.predict(X)) ** 2)
    rss2 = np.sum((y - m2.predict(X)) ** 2)
    assert rss2 <= rss1


def test_fit_warns_on_constant_feature():
    rng = np.random.default_rng(6)
    X = np.column_stack([rng.uniform(0, 1, 100), np.full(100, 2.0)])
    y = X[:, 0] * 2.0
    with pytest.warns(UserWarning, match="constant feature"):
        model = fit_regression(X, y, max_terms=4)
    assert all(h.feature == 0 for hinges, _ in model.terms for h in hinges)


def test_fit_sample_count_validation():
    with pytest.raises(ValueError):
        fit_regression(np.zeros((10, 2)), np.zeros(10), max_terms=10)
    with pytest.raises(ValueError):
        fit_regression(np.zeros((10, 2)), np.zeros(9), max_terms=2)


def test_module_level_predict_helper():
    model = HingeModel(1.0, (), 1)
    assert predict(model, np.array([0.0])) == 1.0
