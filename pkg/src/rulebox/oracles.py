"""Stand-in black boxes the extractors can query.

Extractors never look inside the regressor they explain; they only call
``predict``.  Anything with a scikit-learn style ``predict(X) -> y`` works
as the black box, including the two regressors here: an exact piecewise
model with closed-form per-region outputs, and a small k-nearest-neighbour
regressor over min-max-normalized features.  Both are deterministic:
identical batches always yield identical outputs.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .geometry import Hypercube
from .theory import RuleOutput
from .validation import check_matrix, check_vector


class PiecewisePredictor(BaseEstimator, RegressorMixin):
    """Exact regressor defined by closed-form outputs on disjoint cubes.

    Queries inside a region cube (closed bounds) evaluate that region's
    output; queries in the gaps between regions evaluate the output of the
    nearest region cube (Euclidean distance to the box, ties to the lower
    region index), which keeps the function total and smooth enough to act
    as a black box on generated points.
    """

    def __init__(self, cubes: tuple[Hypercube, ...], outputs: tuple[RuleOutput, ...]):
        if len(cubes) != len(outputs):
            raise ValueError("one output per region cube required")
        if not cubes:
            raise ValueError("at least one region required")
        self.cubes = tuple(cubes)
        self.outputs = tuple(outputs)

    def fit(self, X=None, y=None):
        return self

    def predict(self, X) -> np.ndarray:
        X = check_matrix(X, n_features=self.cubes[0].dim)
        out = np.empty(X.shape[0])
        assigned = np.zeros(X.shape[0], dtype=bool)
        for cube, output in zip(self.cubes, self.outputs):
            mask = ~assigned & cube.contains_closed_batch(X)
            if mask.any():
                out[mask] = output.evaluate(X[mask])
                assigned |= mask
        rest = ~assigned
        if rest.any():
            Xr = X[rest]
            dists = np.column_stack([_box_distance_sq(Xr, cube) for cube in self.cubes])
            nearest = np.argmin(dists, axis=1)  # ties resolve to the lower index
            vals = np.empty(Xr.shape[0])
            for i, output in enumerate(self.outputs):
                sel = nearest == i
                if sel.any():
                    vals[sel] = output.evaluate(Xr[sel])
            out[rest] = vals
        return out


def _box_distance_sq(X: np.ndarray, cube: Hypercube) -> np.ndarray:
    lo, hi = cube.lows, cube.highs
    gap = np.maximum(lo - X, 0.0) + np.maximum(X - hi, 0.0)
    return np.sum(gap * gap, axis=1)


def minmax_params(X) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-dimension (min, max) of the rows of X."""
    X = check_matrix(X)
    return X.min(axis=0), X.max(axis=0)


def apply_minmax(X, params: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Scale columns to [0, 1]; zero-width columns map to constant 0."""
    X = np.asarray(X, dtype=float)
    mins, maxs = params
    width = maxs - mins
    safe = np.where(width > 0, width, 1.0)
    scaled = (X - mins) / safe
    scaled[:, width == 0] = 0.0
    return scaled


class KNNOracle(BaseEstimator, RegressorMixin):
    """k-nearest-neighbour regressor used as a stand-in black box.

    Distances are Euclidean over min-max-normalized features so that no
    single feature's scale dominates.  Neighbour ties break toward the
    lower training-sample index, making predictions fully deterministic.
    """

    def __init__(self, k: int = 3):
        self.k = k

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_vector(y, n=X.shape[0])
        if not 1 <= self.k <= X.shape[0]:
            raise ValueError(f"k={self.k} is outside [1, {X.shape[0]}] for this training set")
        self.params_ = minmax_params(X)
        self.X_ = apply_minmax(X, self.params_)
        self.y_ = y.copy()
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "X_"):
            raise ValueError("KNNOracle must be fitted before predicting")
        X = check_matrix(X, n_features=self.X_.shape[1])
        Q = apply_minmax(X, self.params_)
        d2 = ((Q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return self.y_[order].mean(axis=1)
