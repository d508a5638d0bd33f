"""Datasets, synthetic benchmarks and CSV round-tripping.

The canonical benchmarks place two or three axis-aligned regions inside
the unit square, each carrying its own constant or affine output, with
empty gap strips (width 0.2) between regions so that the groups are
linearly separable.  Sampling is uniform inside each region with optional
Gaussian output noise, driven by numpy's default PCG64 generator so a
seed pins the dataset bit-for-bit on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Hypercube
from .oracles import PiecewisePredictor
from .theory import Constant, Linear, RuleOutput
from .validation import check_matrix, check_vector


class DataError(ValueError):
    """Malformed input data (bad CSV row, shape mismatch, empty file)."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, targets, names, and the enclosing domain box."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    target_name: str = "y"
    domain: Hypercube = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        X = check_matrix(self.X)
        y = check_vector(self.y, n=X.shape[0])
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "feature_names", names)
        domain = self.domain if self.domain is not None else Hypercube.from_points(X)
        if not domain.contains_closed_batch(X).all():
            raise DataError("domain does not contain every sample")
        object.__setattr__(self, "domain", domain)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class PiecewiseSpec:
    """Region cubes with one output each; the ground truth of a benchmark."""

    cubes: tuple[Hypercube, ...]
    outputs: tuple[RuleOutput, ...]
    feature_names: tuple[str, ...] = ("x1", "x2")

    def __post_init__(self):
        if len(self.cubes) != len(self.outputs):
            raise ValueError("one output per region cube required")
        for i, a in enumerate(self.cubes):
            for b in self.cubes[i + 1 :]:
                if a.overlaps(b):
                    raise ValueError("benchmark region cubes must not overlap")

    def oracle(self) -> PiecewisePredictor:
        return PiecewisePredictor(self.cubes, self.outputs)


def tri_linear_spec() -> PiecewiseSpec:
    """Three gap-separated regions, each with its own output plane."""
    return PiecewiseSpec(
        cubes=(
            Hypercube.from_bounds([0.0, 0.0], [0.4, 0.4]),
            Hypercube.from_bounds([0.6, 0.0], [1.0, 0.4]),
            Hypercube.from_bounds([0.0, 0.6], [1.0, 1.0]),
        ),
        outputs=(
            Linear(1.0, (1.0, 1.0)),
            Linear(0.0, (2.0, -1.0)),
            Linear(0.5, (-1.0, 2.0)),
        ),
    )


def tri_constant_spec() -> PiecewiseSpec:
    """Same three regions with constant outputs 1, 2, 3."""
    return PiecewiseSpec(
        cubes=tri_linear_spec().cubes,
        outputs=(Constant(1.0), Constant(2.0), Constant(3.0)),
    )


def single_plane_spec() -> PiecewiseSpec:
    """One region covering the unit square with a single output plane."""
    return PiecewiseSpec(
        cubes=(Hypercube.from_bounds([0.0, 0.0], [1.0, 1.0]),),
        outputs=(Linear(0.2, (1.5, -0.7)),),
    )


BENCHMARKS = {
    "tri-linear": tri_linear_spec,
    "tri-constant": tri_constant_spec,
    "single-plane": single_plane_spec,
}


def generate(
    spec: PiecewiseSpec,
    n_per_region: int,
    noise_sd: float = 0.0,
    seed: int = 0,
) -> Dataset:
    """Sample ``n_per_region`` points uniformly inside each region cube.

    Outputs are the region formula plus optional Gaussian noise; the same
    seed always reproduces the same dataset.
    """
    if n_per_region < 1:
        raise ValueError("n_per_region must be at least 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    blocks_x, blocks_y = [], []
    for cube, output in zip(spec.cubes, spec.outputs):
        X = rng.uniform(cube.lows, cube.highs, size=(n_per_region, cube.dim))
        blocks_x.append(X)
        blocks_y.append(output.evaluate(X))
    X = np.vstack(blocks_x)
    y = np.concatenate(blocks_y)
    if noise_sd > 0:
        # drawn after all positions, so the same seed places samples at the
        # same coordinates whether or not noise is requested
        y = y + noise_sd * rng.standard_normal(y.shape[0])
    return Dataset(X=X, y=y, feature_names=spec.feature_names)


# -- CSV ---------------------------------------------------------------------
# Header row: feature names then the target name.  Values use '.' decimals
# and 17 significant digits, which round-trips IEEE doubles bit-exactly.


def dataset_to_csv(dataset: Dataset) -> str:
    lines = [",".join(dataset.feature_names + (dataset.target_name,))]
    for row, target in zip(dataset.X, dataset.y):
        values = [f"{v:.17g}" for v in row] + [f"{target:.17g}"]
        lines.append(",".join(values))
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str) -> Dataset:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise DataError("CSV needs a header row and at least one sample row")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2:
        raise DataError("CSV header needs at least one feature column and a target")
    n_cols = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != n_cols:
            raise DataError(f"row {lineno}: expected {n_cols} columns, found {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataError(f"row {lineno}: non-numeric value ({exc})") from None
    data = np.asarray(rows)
    return Dataset(
        X=data[:, :-1],
        y=data[:, -1],
        feature_names=tuple(header[:-1]),
        target_name=header[-1],
    )


def save_csv(dataset: Dataset, path) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8")


def load_csv(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such data file: {path}")
    return dataset_from_csv(path.read_text(encoding="utf-8"))
