"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def check_matrix(X, name: str = "X", n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError(f"{name} must contain at least one sample")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"{name} has {X.shape[1]} features, expected {n_features}")
    return X


def check_vector(y, n: int | None = None, name: str = "y") -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"{name} must be a 1-d array, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    if n is not None and y.shape[0] != n:
        raise ValueError(f"{name} has length {y.shape[0]}, expected {n}")
    return y


def check_choice(value, name: str, options: tuple) -> None:
    if value not in options:
        raise ValueError(f"{name} must be one of {options}, got {value!r}")


def check_predictor(predictor, name: str = "predictor") -> None:
    if not hasattr(predictor, "predict") or not callable(predictor.predict):
        raise TypeError(f"{name} must expose a callable predict(X) method")
