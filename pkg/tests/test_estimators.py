import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from jcdicke.estimators import ExactGroundState, MeanFieldGroundState, PhaseClassifier

X = np.array([[1.0, 0.3, 1.0], [1.0, -0.3, 1.0], [-1.0, 0.3, 1.0], [1.0, 0.0, 2.0]])


def test_params_and_clone():
    est = MeanFieldGroundState(grid_points=1001)
    assert est.get_params() == {"grid_points": 1001, "beta_tol": 1e-12, "tie_tol": 1e-10}
    copy = clone(est).set_params(tie_tol=1e-9)
    assert copy.tie_tol == 1e-9 and est.tie_tol == 1e-10


def test_meanfield_transform():
    est = MeanFieldGroundState().fit(X)
    out = est.transform(X)
    assert out.shape == (4, 6)
    assert out[0, 0] == pytest.approx(-out[1, 0], abs=1e-10)
    assert out[3, 1] == pytest.approx(0.25, abs=1e-8)
    assert list(est.get_feature_names_out())[:2] == ["beta", "beta_squared"]
    assert est.n_features_in_ == 3


def test_classifier_predict_and_score():
    clf = PhaseClassifier().fit(X)
    labels = clf.predict(X)
    assert list(labels) == ["P1", "P2", "P3", "L12"]
    assert "L0prime" in clf.classes_
    assert clf.score(X, labels) == 1.0


def test_validation_errors():
    with pytest.raises(NotFittedError):
        MeanFieldGroundState().transform(X)
    with pytest.raises(ValueError):
        MeanFieldGroundState().fit(X[:, :2])
    with pytest.raises(ValueError):
        MeanFieldGroundState().fit(X).transform(X[:, :2])
    with pytest.raises(ValueError):
        PhaseClassifier().fit([[1.0, np.nan, 1.0]])


def test_pipeline():
    # (omega_b, Omega, w) rescaled by 2 leaves beta unchanged
    pipe = make_pipeline(FunctionTransformer(lambda a: 2 * a), MeanFieldGroundState())
    beta = pipe.fit_transform(X)[:, 0]
    assert np.allclose(beta, MeanFieldGroundState().fit_transform(X)[:, 0], atol=1e-10)


def test_exact_ground_state():
    est = ExactGroundState(n_atoms=4).fit([[1.0, 1.0, 0.3, 0.0, 0.0]])
    out = est.transform([[1.0, 1.0, 0.3, 0.0, 0.0]])
    assert out.shape == (1, 5)
    assert out[0, 0] == pytest.approx(-0.5 + 0.3 / 4, abs=1e-10)
    assert out[0, 4] == 1.0
