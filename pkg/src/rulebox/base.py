"""Shared plumbing for the rule extractors.

Extractors are scikit-learn style estimators: hyperparameters in
``__init__``, work in ``fit``, a ``theory_`` attribute afterwards, and
``predict`` evaluating the extracted theory.  The black box being
explained is the ``predictor`` constructor argument (anything with
``predict(X)``).  When pedagogical access to the black box is not needed,
``predictor`` may be None and ``fit(X, y)`` treats ``y`` as the black
box's outputs at the training points.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .geometry import Hypercube
from .theory import Theory
from .validation import check_matrix, check_predictor, check_vector


def default_feature_names(d: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(d))


class BaseRuleExtractor(BaseEstimator, RegressorMixin):
    """Common fit/predict scaffolding; subclasses build the theory."""

    predictor = None
    feature_names = None
    domain = None

    def _start_fit(self, X, y) -> tuple[np.ndarray, np.ndarray, Hypercube, tuple[str, ...]]:
        X = check_matrix(X)
        if self.predictor is not None:
            check_predictor(self.predictor)
            preds = check_vector(
                np.asarray(self.predictor.predict(X), dtype=float),
                n=X.shape[0],
                name="predictor output",
            )
        elif y is not None:
            preds = check_vector(y, n=X.shape[0])
        else:
            raise ValueError(
                f"{type(self).__name__} needs either a predictor or target values y "
                "standing in for the black box's outputs"
            )
        domain = self.domain if self.domain is not None else Hypercube.from_points(X)
        if domain.dim != X.shape[1]:
            raise ValueError("domain dimension differs from X")
        if not domain.contains_closed_batch(X).all():
            raise ValueError("domain does not contain every training sample")
        names = (
            tuple(self.feature_names)
            if self.feature_names is not None
            else default_feature_names(X.shape[1])
        )
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length differs from X")
        self.n_features_in_ = X.shape[1]
        return X, preds, domain, names

    def _check_fitted(self) -> Theory:
        if not hasattr(self, "theory_"):
            raise ValueError(f"{type(self).__name__} must be fitted before use")
        return self.theory_

    def predict(self, X) -> np.ndarray:
        theory = self._check_fitted()
        X = check_matrix(X, n_features=theory.dim)
        return theory.predict(X)

    def match_indices(self, X) -> np.ndarray:
        theory = self._check_fitted()
        X = check_matrix(X, n_features=theory.dim)
        return theory.match_indices(X)

    def rules_text(self, precision: int = 3) -> str:
        return self._check_fitted().render(precision)

    @property
    def rule_count_(self) -> int:
        return len(self._check_fitted().rules)
