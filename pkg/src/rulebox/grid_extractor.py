"""Top-down grid extraction: recursive equal-width slicing plus merging.

The domain box is split into an equal-width grid, level by level.  A cell
whose predictions deviate at most ``threshold`` becomes a rule; a cell
with enough samples and a larger deviation is split again at the next
level; empty cells are dropped.  After every level a merge pass unifies
full-face-adjacent cells whose pooled deviation stays under the
threshold, which claws back rules lost to over-slicing.

``output="constant"`` emits mean-prediction rules; ``output="linear"``
emits least-squares planes per cell (deviation then being the residual
RMS instead of the standard deviation).  Because every level slices each
dimension uniformly, sibling cells always have equal volume; the cost of
that symmetry is that a cell can straddle distinct data regions, which is
precisely what cluster-guided extraction avoids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import BaseRuleExtractor
from .geometry import Hypercube, Region, try_merge_adjacent
from .theory import Constant, Rule, Theory, fit_linear
from .validation import check_choice

OUTPUT_KINDS = ("constant", "linear")


def prediction_deviation(X, preds, output_kind: str) -> float:
    """Spread of black-box predictions within one cell.

    Constant mode: population standard deviation.  Linear mode: RMS
    residual of the least-squares affine fit, so a cell is "settled" once
    a single plane explains it.
    """
    check_choice(output_kind, "output_kind", OUTPUT_KINDS)
    preds = np.asarray(preds, dtype=float)
    if preds.size == 0:
        raise ValueError("deviation needs at least one prediction")
    if output_kind == "constant":
        return float(np.std(preds))
    fitted = fit_linear(X, preds).evaluate(X)
    return float(np.sqrt(np.mean((preds - fitted) ** 2)))


@dataclass
class Cell:
    cube: Hypercube
    indices: np.ndarray
    deviation: float
    final: bool

    @property
    def n_samples(self) -> int:
        return int(self.indices.size)


def _make_cell(cube, indices, X, preds, output_kind, threshold) -> Cell:
    dev = prediction_deviation(X[indices], preds[indices], output_kind)
    return Cell(cube=cube, indices=indices, deviation=dev, final=dev <= threshold)


def merge_pass(cells: list[Cell], threshold: float, output_kind: str, X, preds) -> list[Cell]:
    """Greedy pairwise unification of full-face-adjacent cells.

    Repeatedly merges the adjacent pair whose pooled deviation is minimal,
    as long as that deviation stays within the threshold; runs to
    fixpoint.  Merged cells are final by construction.  Never increases
    the cell count.
    """
    cells = list(cells)
    while True:
        best = None
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                merged_cube = try_merge_adjacent(cells[i].cube, cells[j].cube)
                if merged_cube is None:
                    continue
                pooled = np.concatenate([cells[i].indices, cells[j].indices])
                dev = prediction_deviation(X[pooled], preds[pooled], output_kind)
                if best is None or (dev, i, j) < best[:3]:
                    best = (dev, i, j, merged_cube, pooled)
        if best is None or best[0] > threshold:
            return cells
        dev, i, j, merged_cube, pooled = best
        cells[i] = Cell(cube=merged_cube, indices=pooled, deviation=dev, final=True)
        del cells[j]


class GridRuleExtractor(BaseRuleExtractor):
    """Threshold-driven recursive grid partitioning of the input space.

    Parameters
    ----------
    predictor : object with predict(X), optional
        Black box to mimic; when None, fit(X, y) uses y as its outputs.
    max_depth : int
        Number of split levels.
    slices : sequence of per-dimension slice counts, one entry per level,
        e.g. ``[(2, 2), (3, 3)]``; an int entry applies to every
        dimension.  None means 2 slices per dimension at every level.
    threshold : float
        Deviation (output units) below which a cell becomes a rule.  The
        readability/fidelity trade-off knob: smaller values chase the
        black box harder and emit more rules.
    min_samples : int
        Cells with fewer samples are never split further.
    output : "constant" or "linear"
        Rule output family (mean value vs least-squares plane).
    feature_names, domain : optional presentation/geometry overrides.
    """

    def __init__(
        self,
        predictor=None,
        max_depth: int = 2,
        slices=None,
        threshold: float = 0.1,
        min_samples: int = 1,
        output: str = "constant",
        feature_names=None,
        domain=None,
    ):
        self.predictor = predictor
        self.max_depth = max_depth
        self.slices = slices
        self.threshold = threshold
        self.min_samples = min_samples
        self.output = output
        self.feature_names = feature_names
        self.domain = domain

    def _level_slices(self, d: int) -> list[tuple[int, ...]]:
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.slices is None:
            return [(2,) * d for _ in range(self.max_depth)]
        levels = []
        for entry in self.slices:
            if np.isscalar(entry):
                levels.append((int(entry),) * d)
            else:
                entry = tuple(int(s) for s in entry)
                if len(entry) != d:
                    raise ValueError(f"slice entry {entry} does not match {d} dimensions")
                levels.append(entry)
        if len(levels) != self.max_depth:
            raise ValueError(
                f"slices defines {len(levels)} levels but max_depth is {self.max_depth}"
            )
        return levels

    def fit(self, X, y=None):
        X, preds, domain, names = self._start_fit(X, y)
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.min_samples < 1:
            raise ValueError("min_samples must be at least 1")
        check_choice(self.output, "output", OUTPUT_KINDS)
        level_slices = self._level_slices(X.shape[1])

        root = _make_cell(
            domain, np.arange(X.shape[0]), X, preds, self.output, self.threshold
        )
        cells = [root]
        self.split_log_ = []
        self.merge_log_ = []
        for slices in level_slices:
            next_cells = []
            for cell in cells:
                if cell.final or cell.n_samples < self.min_samples:
                    next_cells.append(cell)
                    continue
                children = cell.cube.split_grid(slices)
                self.split_log_.append((cell.cube, tuple(children)))
                for child in children:
                    inside = cell.indices[child.contains_batch(X[cell.indices], domain)]
                    if inside.size == 0:
                        continue
                    next_cells.append(
                        _make_cell(child, inside, X, preds, self.output, self.threshold)
                    )
            before = len(next_cells)
            cells = merge_pass(next_cells, self.threshold, self.output, X, preds)
            self.merge_log_.append((before, len(cells)))

        rules = []
        for cell in cells:
            if self.output == "constant":
                out = Constant(float(np.mean(preds[cell.indices])))
            else:
                out = fit_linear(X[cell.indices], preds[cell.indices])
            rules.append(Rule(region=Region(outer=cell.cube), output=out))
        self.cells_ = cells
        self.theory_ = Theory(
            rules=tuple(rules),
            default_output=Constant(float(np.mean(preds))),
            feature_names=names,
            domain=domain,
        )
        return self
