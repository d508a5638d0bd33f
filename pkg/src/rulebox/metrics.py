"""Fidelity and readability measurement for extracted theories.

Fidelity metrics (MAE, MSE, R^2) compare theory predictions with the
black box's predictions: an extractor's job is to mimic the black box,
so noise in the ground truth must not contaminate its score.  The
predictive MAE against the true targets and the rule count (the
readability proxy) complete the picture, together with coverage: the
fraction of evaluation points answered by an actual rule rather than the
default output.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .cluster_extractor import ClusterRuleExtractor
from .grid_extractor import GridRuleExtractor
from .iter_extractor import IterRuleExtractor
from .theory import Theory
from .validation import check_matrix, check_vector

METHOD_ORDER = ("iter", "gridex", "gridrex", "cluster")

REPORT_FIELDS = (
    "method",
    "rule_count",
    "fidelity_mae",
    "fidelity_mse",
    "fidelity_r2",
    "predictive_mae",
    "coverage",
)


@dataclass(frozen=True)
class EvaluationReport:
    method: str
    rule_count: int
    fidelity_mae: float
    fidelity_mse: float
    fidelity_r2: float
    predictive_mae: float
    coverage: float


def r_squared(predicted: np.ndarray, reference: np.ndarray) -> float:
    """R^2 of predicted against reference; constant references score 1.0
    only when matched exactly, 0.0 otherwise."""
    ss_res = float(np.sum((reference - predicted) ** 2))
    ss_tot = float(np.sum((reference - np.mean(reference)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def evaluate(
    theory: Theory,
    X,
    y,
    predictor,
    method: str = "",
    holdout_fraction: float = 0.0,
    seed: int = 0,
) -> EvaluationReport:
    """Score one theory on a dataset against its black box.

    With ``holdout_fraction`` > 0 the metrics are computed on a seeded
    random held-out subset instead of the full data.
    """
    X = check_matrix(X)
    y = check_vector(y, n=X.shape[0])
    if not 0 <= holdout_fraction < 1:
        raise ValueError("holdout_fraction must be in [0, 1)")
    if holdout_fraction > 0:
        rng = np.random.default_rng(seed)
        take = rng.permutation(X.shape[0])[: max(1, round(holdout_fraction * X.shape[0]))]
        X, y = X[take], y[take]
    oracle_preds = check_vector(
        np.asarray(predictor.predict(X), dtype=float), n=X.shape[0], name="predictor output"
    )
    theory_preds = theory.predict(X)
    errors = theory_preds - oracle_preds
    return EvaluationReport(
        method=method,
        rule_count=len(theory.rules),
        fidelity_mae=float(np.mean(np.abs(errors))),
        fidelity_mse=float(np.mean(errors**2)),
        fidelity_r2=r_squared(theory_preds, oracle_preds),
        predictive_mae=float(np.mean(np.abs(theory_preds - y))),
        coverage=float(np.mean(theory.match_indices(X) >= 0)),
    )


def build_extractor(method: str, predictor, seed: int = 0, params: dict | None = None):
    """Instantiate the extractor behind a method name.

    gridex and gridrex share the grid extractor; the method name pins the
    output family (constant vs linear planes).
    """
    params = dict(params or {})
    if method == "iter":
        return IterRuleExtractor(predictor=predictor, seed=seed, **params)
    if method in ("gridex", "gridrex"):
        params.setdefault("output", "constant" if method == "gridex" else "linear")
        return GridRuleExtractor(predictor=predictor, **params)
    if method == "cluster":
        return ClusterRuleExtractor(predictor=predictor, seed=seed, **params)
    raise ValueError(f"unknown method {method!r}; expected one of {METHOD_ORDER}")


def compare_methods(
    X,
    y,
    predictor,
    methods=METHOD_ORDER,
    iter_params: dict | None = None,
    grid_params: dict | None = None,
    cluster_params: dict | None = None,
    seed: int = 0,
) -> list[EvaluationReport]:
    """Run the requested extractors on one dataset and score each.

    Methods run in the fixed canonical order; failures carry the method
    name so a broken configuration is attributable.
    """
    for m in methods:
        if m not in METHOD_ORDER:
            raise ValueError(f"unknown method {m!r}; expected one of {METHOD_ORDER}")
    per_method = {
        "iter": iter_params,
        "gridex": grid_params,
        "gridrex": grid_params,
        "cluster": cluster_params,
    }
    reports = []
    for method in METHOD_ORDER:
        if method not in methods:
            continue
        try:
            extractor = build_extractor(method, predictor, seed=seed, params=per_method[method])
            extractor.fit(X, y)
            reports.append(evaluate(extractor.theory_, X, y, predictor, method=method))
        except Exception as exc:
            raise RuntimeError(f"method {method!r} failed: {exc}") from exc
    return reports


def reports_to_csv(reports) -> str:
    lines = [",".join(REPORT_FIELDS)]
    for r in reports:
        row = asdict(r)
        cells = [str(row["method"]), str(row["rule_count"])]
        cells += [f"{row[f]:.17g}" for f in REPORT_FIELDS[2:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def reports_to_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2) + "\n"
