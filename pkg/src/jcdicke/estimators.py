"""scikit-learn compatible wrappers.

Rows of ``X`` are parameter points. The estimators are stateless: ``fit``
only validates input and records ``n_features_in_``, so they drop into
pipelines, ``clone`` and ``get_params``/``set_params`` like any other
transformer.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import exact_diag as ed
from .meanfield import MeanFieldProblem, SolverOptions, solve_ground_state
from .params import ModelParams
from .phases import BOUNDARY_TOL, PhaseLabel, classify

MEANFIELD_COLUMNS = ("omega_b", "Omega", "w")
MODEL_COLUMNS = ("omega_a", "omega_b", "eta", "lambda", "Omega")


def check_parameter_rows(X, n_columns: int, names) -> np.ndarray:
    """Validate a 2-D float array of parameter rows with a fixed column count."""
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != n_columns:
        raise ValueError(f"expected {n_columns} columns {tuple(names)}, got {X.shape[1]}")
    return X


class _ParameterRowsMixin:
    _columns: tuple = ()

    def fit(self, X, y=None):
        X = check_parameter_rows(X, len(self._columns), self._columns)
        self.n_features_in_ = X.shape[1]
        self.feature_names_in_ = np.asarray(self._columns, dtype=object)
        return self

    def _validate(self, X):
        check_is_fitted(self, "n_features_in_")
        return check_parameter_rows(X, self.n_features_in_, self._columns)


class MeanFieldGroundState(_ParameterRowsMixin, TransformerMixin, BaseEstimator):
    """Map ``(omega_b, Omega, w)`` rows to mean-field ground-state quantities.

    Output columns are ``beta, beta_squared, magnetization, energy,
    residual, degenerate`` (the last as 0.0/1.0).
    """

    _columns = MEANFIELD_COLUMNS
    output_columns = ("beta", "beta_squared", "magnetization", "energy", "residual", "degenerate")

    def __init__(self, grid_points=2001, beta_tol=1e-12, tie_tol=1e-10):
        self.grid_points = grid_points
        self.beta_tol = beta_tol
        self.tie_tol = tie_tol

    def _options(self):
        return SolverOptions(self.grid_points, self.beta_tol, self.tie_tol)

    def solve(self, X):
        X = self._validate(X)
        opts = self._options()
        return [solve_ground_state(MeanFieldProblem(*row), opts) for row in X]

    def transform(self, X):
        sols = self.solve(X)
        return np.array([[s.beta, s.beta_squared, s.magnetization, s.energy, s.residual,
                          float(s.degenerate)] for s in sols]).reshape(-1, 6)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.output_columns, dtype=object)


class PhaseClassifier(_ParameterRowsMixin, ClassifierMixin, BaseEstimator):
    """Predict the phase label of ``(omega_b, Omega, w)`` rows.

    Labels follow from the signs of ``omega_b`` and ``Omega`` and, on the
    ``Omega = 0`` lines, from ``w`` relative to ``|omega_b|``; nothing is
    learned. ``y`` passed to ``fit`` is ignored apart from the usual shape
    check, so ``score`` can compare against reference labels.
    """

    _columns = MEANFIELD_COLUMNS

    def __init__(self, tol=BOUNDARY_TOL):
        self.tol = tol

    def fit(self, X, y=None):
        super().fit(X)
        self.classes_ = np.array([label.value for label in PhaseLabel], dtype=object)
        return self

    def predict(self, X):
        X = self._validate(X)
        return np.array([classify(MeanFieldProblem(*row), tol=self.tol).value for row in X],
                        dtype=object)


class ExactGroundState(_ParameterRowsMixin, TransformerMixin, BaseEstimator):
    """Finite-N exact diagonalization of ``(omega_a, omega_b, eta, lambda,
    Omega)`` rows.

    Output columns: ``energy_per_atom, jz_per_atom, photons_per_atom,
    n_max_used, converged``.
    """

    _columns = MODEL_COLUMNS
    output_columns = ("energy_per_atom", "jz_per_atom", "photons_per_atom",
                      "n_max_used", "converged")

    def __init__(self, n_atoms=8, n_max=None, max_dim=ed.DEFAULT_MAX_DIM):
        self.n_atoms = n_atoms
        self.n_max = n_max
        self.max_dim = max_dim

    def transform(self, X):
        X = self._validate(X)
        out = np.empty((X.shape[0], 5))
        for i, (oa, ob, eta, lam, Om) in enumerate(X):
            params = ModelParams(oa, ob, eta, lam, Om, N=int(self.n_atoms))
            r = ed.ground_state(params, self.n_max, max_dim=self.max_dim)
            out[i] = (r.energy_per_atom, r.jz_per_atom, r.photons_per_atom,
                      r.n_max_used, float(r.converged))
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.output_columns, dtype=object)
