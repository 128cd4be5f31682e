import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from stratsmooth.estimator import StratifiedSmoother


@pytest.fixture(scope="module")
def fitted():
    sm = StratifiedSmoother(problem="axis:n=2", field={"id": "coord", "params": {"index": 1}}, epsilon=0.05)
    return sm.fit()


def test_get_set_params_roundtrip():
    sm = StratifiedSmoother(problem="simplex2d", epsilon=0.2, seed=3)
    params = sm.get_params()
    assert params["problem"] == "simplex2d"
    sm.set_params(epsilon=0.1)
    assert sm.epsilon == 0.1
    clone(sm)  # sklearn clone requires a faithful constructor


def test_predict_requires_fit():
    sm = StratifiedSmoother()
    with pytest.raises(NotFittedError):
        sm.predict(np.zeros((1, 4)))


def test_fit_predict_matches_direct_evaluation(fitted):
    X = np.random.default_rng(0).uniform(-1.5, 1.5, size=(40, 2))
    preds = fitted.predict(X)
    direct = np.array([fitted.smoothed_(row) for row in X])
    assert np.array_equal(preds, direct)


def test_gradient_shape_and_tangency(fitted):
    X = np.stack([np.linspace(-1, 1, 10), np.zeros(10)], axis=1)
    G = fitted.gradient(X)
    assert G.shape == (10, 2)
    # on the axis the smoothed coordinate field has vanishing normal slope
    assert np.max(np.abs(G[:, 1])) <= 1e-8


def test_score_is_closeness_margin(fitted):
    X = np.random.default_rng(1).uniform(-1.5, 1.5, size=(200, 2))
    s = fitted.score(X)
    assert 0.0 < s <= 1.0


def test_input_validation(fitted):
    with pytest.raises(ValueError):
        fitted.predict(np.zeros((3, 5)))
    with pytest.raises(ValueError):
        fitted.predict([[np.nan, 0.0]])


def test_fit_with_sample_box():
    sm = StratifiedSmoother(problem="axis:n=2", field="frobsq", epsilon=0.5)
    X = np.random.default_rng(2).uniform(-1.0, 1.0, size=(64, 2))
    sm.fit(X)
    assert sm.n_features_in_ == 2
    assert sm.box_[0].shape == (2,)
    with pytest.raises(ValueError):
        sm.fit(np.zeros((4, 3)))


def test_certificates_attribute():
    sm = StratifiedSmoother(problem="Aplus:n=2", field="frobsq", epsilon=0.1, target_order=2).fit()
    kinds = {c["condition"] for c in sm.certificates_}
    assert "frontier" in kinds
    assert "normal-flatness" in kinds
    assert all(c["passed"] for c in sm.certificates_)


def test_epsilon_positivity_rejected_at_fit():
    sm = StratifiedSmoother(problem="axis:n=2", field="frobsq", epsilon=-0.1)
    with pytest.raises(ValueError):
        sm.fit()


def test_predict_base_returns_original_field(fitted):
    X = np.stack([np.linspace(-1, 1, 8), np.full(8, 1.5)], axis=1)
    base = fitted.predict_base(X)
    assert np.allclose(base, X[:, 1])  # the raw coordinate field
    # far outside the tube the smoothed field agrees with the base
    assert np.allclose(fitted.predict(X), base)


def test_composes_in_sklearn_pipeline():
    from sklearn.pipeline import Pipeline

    X = np.random.default_rng(3).uniform(-1.5, 1.5, size=(60, 2))
    pipe = Pipeline([
        ("smooth", StratifiedSmoother(
            problem="axis:n=2", field={"id": "coord", "params": {"index": 1}}, epsilon=0.05,
        )),
    ])
    pipe.fit(X)
    assert pipe.predict(X).shape == (60,)
    assert pipe.score(X) > 0.0
