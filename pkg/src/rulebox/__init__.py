"""rulebox: readable if-then rule theories from black-box regressors.

Extractors are scikit-learn style estimators that mimic any regressor
exposing ``predict(X)`` with an ordered list of hypercube rules:

>>> from rulebox import ClusterRuleExtractor, datasets
>>> ds = datasets.generate(datasets.tri_linear_spec(), 100, seed=42)
>>> ex = ClusterRuleExtractor(predictor=datasets.tri_linear_spec().oracle(),
...                           k=3, trim_fraction=0.0).fit(ds.X)
>>> print(ex.rules_text())                        # doctest: +SKIP
"""

from . import clustering, datasets, geometry, metrics, oracles, theory
from .base import BaseRuleExtractor
from .cluster_extractor import ClusterRuleExtractor, select_k
from .geometry import Hypercube, Interval, Region, enclosing_cube
from .grid_extractor import GridRuleExtractor, merge_pass, prediction_deviation
from .iter_extractor import IterRuleExtractor, side_candidates
from .metrics import EvaluationReport, compare_methods, evaluate
from .oracles import KNNOracle, PiecewisePredictor
from .theory import Constant, Linear, Rule, Theory, fit_linear

__version__ = "0.1.0"

__all__ = [
    "BaseRuleExtractor",
    "ClusterRuleExtractor",
    "Constant",
    "EvaluationReport",
    "GridRuleExtractor",
    "Hypercube",
    "Interval",
    "IterRuleExtractor",
    "KNNOracle",
    "Linear",
    "PiecewisePredictor",
    "Region",
    "Rule",
    "Theory",
    "clustering",
    "compare_methods",
    "datasets",
    "enclosing_cube",
    "evaluate",
    "fit_linear",
    "geometry",
    "merge_pass",
    "metrics",
    "oracles",
    "prediction_deviation",
    "select_k",
    "side_candidates",
    "theory",
    "__version__",
]
