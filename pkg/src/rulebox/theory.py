"""Rule theories: ordered region -> output lists with first-match evaluation.

A theory is an ordered list of rules plus a default output.  Evaluation
walks the rules in order and returns the output of the first rule whose
region contains the query point; the default covers everything else.
Ordering is semantic: listing a small cube before a larger overlapping one
realises a difference region without any geometric subtraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Hypercube, Region

JSON_FORMAT = "rulebox-theory/1"


@dataclass(frozen=True)
class Constant:
    """Constant rule output."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def evaluate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.full(X.shape[0], self.value)

    def render(self, feature_names, precision: int) -> str:
        return f"{self.value:.{precision}f}"


@dataclass(frozen=True)
class Linear:
    """Affine rule output: intercept + sum(coefficients * x)."""

    intercept: float
    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "intercept", float(self.intercept))
        coeffs = tuple(float(c) for c in self.coefficients)
        if not all(np.isfinite(c) for c in coeffs) or not np.isfinite(self.intercept):
            raise ValueError("linear output requires finite coefficients")
        object.__setattr__(self, "coefficients", coeffs)

    def evaluate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.intercept + X @ np.asarray(self.coefficients)

    def render(self, feature_names, precision: int) -> str:
        parts = [f"{self.intercept:.{precision}f}"]
        for c, name in zip(self.coefficients, feature_names):
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {abs(c):.{precision}f}*{name}")
        return " ".join(parts)


RuleOutput = Constant | Linear


@dataclass(frozen=True)
class Rule:
    region: Region
    output: RuleOutput

    def __post_init__(self):
        if isinstance(self.output, Linear) and len(self.output.coefficients) != self.region.dim:
            raise ValueError("linear output dimension differs from region dimension")


@dataclass(frozen=True)
class Theory:
    """Ordered rules, a default output, and the domain they were built on."""

    rules: tuple[Rule, ...]
    default_output: RuleOutput
    feature_names: tuple[str, ...]
    domain: Hypercube

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "feature_names", tuple(str(n) for n in self.feature_names))
        if len(self.feature_names) != self.domain.dim:
            raise ValueError("feature name count differs from domain dimension")
        for rule in self.rules:
            if rule.region.dim != self.domain.dim:
                raise ValueError("rule dimension differs from domain dimension")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def match_indices(self, X) -> np.ndarray:
        """Index of the first matching rule per row, -1 where only the default applies."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"expected a (n, {self.dim}) array of points")
        matched = np.full(X.shape[0], -1, dtype=int)
        open_rows = np.ones(X.shape[0], dtype=bool)
        for i, rule in enumerate(self.rules):
            if not open_rows.any():
                break
            hit = open_rows & rule.region.contains_batch(X, self.domain)
            matched[hit] = i
            open_rows &= ~hit
        return matched

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        matched = self.match_indices(X)
        out = self.default_output.evaluate(X)
        for i, rule in enumerate(self.rules):
            mask = matched == i
            if mask.any():
                out[mask] = rule.output.evaluate(X[mask])
        return out

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=float)[None, :])[0])

    # -- presentation --------------------------------------------------------

    def render(self, precision: int = 3) -> str:
        """Human-readable listing, one rule per line, default last.

        Deterministic for a given theory and precision: fixed decimal
        places, fixed ordering, no locale dependence.
        """
        lines = []
        for rule in self.rules:
            close = "]" if rule.region.closed else ")"
            conds = [
                f"{name} in [{iv.lo:.{precision}f}, {iv.hi:.{precision}f}{close}"
                for name, iv in zip(self.feature_names, rule.region.outer.intervals)
            ]
            for hole in rule.region.holes:
                hconds = [
                    f"{name} in [{iv.lo:.{precision}f}, {iv.hi:.{precision}f}{close}"
                    for name, iv in zip(self.feature_names, hole.intervals)
                ]
                conds.append("not (" + " and ".join(hconds) + ")")
            body = rule.output.render(self.feature_names, precision)
            lines.append(f"if {' and '.join(conds)} then y = {body}")
        lines.append(f"else y = {self.default_output.render(self.feature_names, precision)}")
        return "\n".join(lines) + "\n"

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "format": JSON_FORMAT,
            "feature_names": list(self.feature_names),
            "domain": _cube_to_json(self.domain),
            "rules": [
                {
                    "region": {
                        "outer": _cube_to_json(r.region.outer),
                        "holes": [_cube_to_json(h) for h in r.region.holes],
                        "closed": r.region.closed,
                    },
                    "output": _output_to_json(r.output),
                }
                for r in self.rules
            ],
            "default": _output_to_json(self.default_output),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, data: dict) -> "Theory":
        if data.get("format") != JSON_FORMAT:
            raise ValueError(f"unsupported theory format: {data.get('format')!r}")
        rules = tuple(
            Rule(
                region=Region(
                    outer=_cube_from_json(r["region"]["outer"]),
                    holes=tuple(_cube_from_json(h) for h in r["region"]["holes"]),
                    closed=bool(r["region"]["closed"]),
                ),
                output=_output_from_json(r["output"]),
            )
            for r in data["rules"]
        )
        return cls(
            rules=rules,
            default_output=_output_from_json(data["default"]),
            feature_names=tuple(data["feature_names"]),
            domain=_cube_from_json(data["domain"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Theory":
        return cls.from_json_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Theory":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _cube_to_json(cube: Hypercube) -> dict:
    return {"lo": [iv.lo for iv in cube.intervals], "hi": [iv.hi for iv in cube.intervals]}


def _cube_from_json(data: dict) -> Hypercube:
    return Hypercube.from_bounds(data["lo"], data["hi"])


def _output_to_json(output: RuleOutput) -> dict:
    if isinstance(output, Constant):
        return {"kind": "constant", "value": output.value}
    return {
        "kind": "linear",
        "intercept": output.intercept,
        "coefficients": list(output.coefficients),
    }


def _output_from_json(data: dict) -> RuleOutput:
    if data["kind"] == "constant":
        return Constant(data["value"])
    if data["kind"] == "linear":
        return Linear(data["intercept"], tuple(data["coefficients"]))
    raise ValueError(f"unknown output kind: {data['kind']!r}")


def fit_linear(X, y) -> RuleOutput:
    """Least-squares affine fit of y on X via the normal equations.

    Degenerate designs (fewer samples than d+1 or rank-deficient columns)
    fall back to the constant mean.  If the normal matrix is numerically
    singular despite a full-rank design, a 1e-9 diagonal ridge keeps the
    solve well posed without visibly biasing well-conditioned fits.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("expected X of shape (n, d) and y of shape (n,)")
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit an output to zero samples")
    design = np.column_stack([np.ones(n), X])
    if n < d + 1 or np.linalg.matrix_rank(design) < d + 1:
        return Constant(float(np.mean(y)))
    gram = design.T @ design
    moment = design.T @ y
    try:
        beta = np.linalg.solve(gram, moment)
    except np.linalg.LinAlgError:
        beta = np.linalg.solve(gram + 1e-9 * np.eye(d + 1), moment)
    return Linear(float(beta[0]), tuple(beta[1:]))
