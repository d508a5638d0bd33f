"""Cluster-guided extraction: find regions first, then box and rank them.

Instead of carving the input space blindly, this extractor clusters the
training data (jointly over inputs and black-box outputs), wraps each
cluster in a minimal quantile-trimmed hypercube, and emits exactly one
rule per cluster.  Rules are ordered by priority (more samples first,
then larger volume), and whenever a lower-priority cube overlaps a
higher-priority one, the overlap is cut out as an explicit hole, so every
rendered rule describes exactly the region it answers for.

Trimmed-away samples are deliberately left outside the boxes; they fall
through to the theory's default output.  That keeps the cubes minimal in
the presence of outliers, at the price of less than full coverage.
"""

from __future__ import annotations

import numpy as np

from .base import BaseRuleExtractor
from .clustering import ALGORITHMS, cluster_labels, joint_embedding
from .geometry import Region, enclosing_cube
from .theory import Constant, Rule, Theory, fit_linear
from .validation import check_choice

OUTPUT_KINDS = ("constant", "linear")

# Validation MAEs closer than this count as tied, and ties resolve to the
# smaller k: a plane refit from a subset of the same exact samples differs
# only by rounding noise, which must not buy extra rules.
K_SELECTION_TIE_TOL = 1e-9


def priority_order(counts, volumes) -> list[int]:
    """Cluster indices sorted by (more samples, larger volume, lower index)."""
    counts = list(counts)
    volumes = list(volumes)
    return sorted(range(len(counts)), key=lambda i: (-counts[i], -volumes[i], i))


def select_k(
    X,
    preds,
    k_max: int = 6,
    *,
    algorithm: str = "agglomerative-ward",
    output_weight: float = 1.0,
    trim_fraction: float = 0.05,
    output: str = "linear",
    seed: int = 0,
) -> int:
    """Pick the cluster count by brute-force validation sweep.

    Splits the data 80/20 with the given seed, runs the full pipeline for
    every k in [1, k_max] on the training part, and returns the k whose
    theory has the smallest MAE against the black-box outputs on the
    validation part; near-ties go to the smaller k.
    """
    X = np.asarray(X, dtype=float)
    preds = np.asarray(preds, dtype=float)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(X.shape[0])
    n_val = max(1, round(0.2 * X.shape[0]))
    if X.shape[0] - n_val < 1:
        raise ValueError("dataset too small for an 80/20 split")
    val, train = perm[:n_val], perm[n_val:]
    maes = []
    for k in range(1, k_max + 1):
        if k > train.size:
            maes.append(np.inf)
            continue
        extractor = ClusterRuleExtractor(
            k=k,
            algorithm=algorithm,
            output_weight=output_weight,
            trim_fraction=trim_fraction,
            output=output,
            seed=seed,
        ).fit(X[train], preds[train])
        maes.append(float(np.mean(np.abs(extractor.predict(X[val]) - preds[val]))))
    best = min(maes)
    for k, mae in enumerate(maes, start=1):
        if mae <= best + K_SELECTION_TIE_TOL:
            return k
    raise AssertionError("unreachable: some k must reach the best MAE")


class ClusterRuleExtractor(BaseRuleExtractor):
    """One rule per discovered cluster, boxed minimally and ranked.

    Parameters
    ----------
    predictor : object with predict(X), optional
        Black box to mimic; when None, fit(X, y) uses y as its outputs.
    k : int or "auto"
        Cluster count; "auto" sweeps 1..k_max by validation error.
    k_max : int
        Search bound for auto mode.
    algorithm : "kmeans" or "agglomerative-ward"
        Ward is the default: k-means favours round clusters and will carve
        up elongated regions that Ward keeps whole.
    output_weight : float
        Weight of the normalized prediction in the clustering metric;
        0 clusters on inputs alone.
    trim_fraction : float in [0, 0.5)
        Symmetric per-dimension quantile trim when boxing a cluster.
    output : "constant" or "linear"
        Rule output family.
    seed : int
        Drives clustering initialization and the auto-k split.
    """

    def __init__(
        self,
        predictor=None,
        k="auto",
        k_max: int = 6,
        algorithm: str = "agglomerative-ward",
        output_weight: float = 1.0,
        trim_fraction: float = 0.05,
        output: str = "linear",
        seed: int = 0,
        feature_names=None,
        domain=None,
    ):
        self.predictor = predictor
        self.k = k
        self.k_max = k_max
        self.algorithm = algorithm
        self.output_weight = output_weight
        self.trim_fraction = trim_fraction
        self.output = output
        self.seed = seed
        self.feature_names = feature_names
        self.domain = domain

    def fit(self, X, y=None):
        X, preds, domain, names = self._start_fit(X, y)
        check_choice(self.output, "output", OUTPUT_KINDS)
        check_choice(self.algorithm, "algorithm", ALGORITHMS)
        if not 0 <= self.trim_fraction < 0.5:
            raise ValueError("trim_fraction must be in [0, 0.5)")

        if self.k == "auto":
            k = select_k(
                X,
                preds,
                self.k_max,
                algorithm=self.algorithm,
                output_weight=self.output_weight,
                trim_fraction=self.trim_fraction,
                output=self.output,
                seed=self.seed,
            )
        else:
            k = int(self.k)
            if k < 1:
                raise ValueError("k must be at least 1")
            if k > X.shape[0]:
                raise ValueError(f"k={k} exceeds the {X.shape[0]} available samples")
        self.k_ = k

        Z = joint_embedding(X, preds, self.output_weight)
        labels = cluster_labels(Z, k, self.algorithm, seed=self.seed)
        self.labels_ = labels

        members = [np.flatnonzero(labels == c) for c in range(k)]
        cubes = [enclosing_cube(X[idx], self.trim_fraction) for idx in members]
        retained = [idx[cubes[c].contains_closed_batch(X[idx])] for c, idx in enumerate(members)]
        order = priority_order(
            [idx.size for idx in members], [cube.volume for cube in cubes]
        )
        self.priority_ = order
        self.cluster_cubes_ = cubes

        rules = []
        for rank, c in enumerate(order):
            holes = tuple(
                cubes[order[r]] for r in range(rank) if cubes[order[r]].overlaps(cubes[c])
            )
            idx = retained[c] if retained[c].size else members[c]
            if self.output == "constant":
                out = Constant(float(np.mean(preds[idx])))
            else:
                out = fit_linear(X[idx], preds[idx])
            rules.append(Rule(region=Region(outer=cubes[c], holes=holes, closed=True), output=out))

        self.theory_ = Theory(
            rules=tuple(rules),
            default_output=Constant(float(np.mean(preds))),
            feature_names=names,
            domain=domain,
        )
        return self
