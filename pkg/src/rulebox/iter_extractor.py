"""Bottom-up extraction: grow cubes from point seeds until space runs out.

Degenerate (zero-width) cubes are seeded at random training points.  Each
iteration builds at most two temporary side-slabs per dimension around
every cube (clipped to the domain and stopped at neighbouring cubes),
scores each slab by how far the black box's mean prediction inside it
drifts from the owning cube's mean, and commits the single best slab
whose drift stays within the similarity threshold.  Cubes therefore never
overlap and never leave the domain.  When the iteration budget runs out
before space is covered, the uncovered remainder falls to the theory's
default output.

Slab predictions are sampled at ``points_per_cube`` uniform points whose
RNG stream is derived from the slab's bounds, so scores are reproducible
regardless of evaluation order and may be cached safely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import BaseRuleExtractor
from .geometry import LOWER, UPPER, Hypercube, Region
from .theory import Constant, Rule, Theory
from .validation import check_predictor

_SIDE_ORDER = {LOWER: 0, UPPER: 1}


def side_candidates(
    cube: Hypercube,
    others: list[Hypercube],
    width: float,
    domain: Hypercube,
) -> list[tuple[int, str, Hypercube]]:
    """All non-empty temporary side-cubes of one cube: <= 2 per dimension."""
    out = []
    for dim in range(cube.dim):
        for side in (LOWER, UPPER):
            slab = cube.expand(dim, side, width, domain, blockers=others)
            if slab is not None:
                out.append((dim, side, slab))
    return out


def _cube_rng(seed: int, cube: Hypercube) -> np.random.Generator:
    # Key the stream on the exact bit patterns of the slab bounds: the same
    # slab always gets the same sample points, whatever order it turns up in.
    bounds = np.array([b for iv in cube.intervals for b in (iv.lo, iv.hi)], dtype="<f8")
    words = np.frombuffer(bounds.tobytes(), dtype="<u8").tolist()
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *words]))


def _uniform_points(cube: Hypercube, m: int, seed: int) -> np.ndarray:
    rng = _cube_rng(seed, cube)
    return rng.uniform(cube.lows, cube.highs, size=(m, cube.dim))


@dataclass
class _CubeState:
    cube: Hypercube
    seed_index: int
    points: list = field(default_factory=list)  # committed slab sample points
    pred_sum: float = 0.0
    pred_count: int = 0

    @property
    def mean(self) -> float:
        return self.pred_sum / self.pred_count


class IterRuleExtractor(BaseRuleExtractor):
    """Iterative hypercube expansion around seed points.

    Parameters
    ----------
    predictor : object with predict(X); required, since scoring queries
        the black box on generated points inside candidate slabs.
    n_initial : int
        Number of seed cubes, each a zero-width cube at a distinct
        training point.
    update_width : float
        Maximum thickness (feature units) of one expansion slab.
    threshold : float
        Largest admissible |mean(slab) - mean(cube)| (output units).
    max_iterations : int
        Hard cap; one slab commits per iteration.
    points_per_cube : int
        Black-box queries per candidate slab.
    seed : int
        Drives seed-point choice and slab sampling.
    """

    def __init__(
        self,
        predictor=None,
        n_initial: int = 3,
        update_width: float = 0.1,
        threshold: float = 0.1,
        max_iterations: int = 600,
        points_per_cube: int = 20,
        seed: int = 0,
        feature_names=None,
        domain=None,
    ):
        self.predictor = predictor
        self.n_initial = n_initial
        self.update_width = update_width
        self.threshold = threshold
        self.max_iterations = max_iterations
        self.points_per_cube = points_per_cube
        self.seed = seed
        self.feature_names = feature_names
        self.domain = domain

    def _seed_cubes(self, X, rng) -> list[_CubeState]:
        states: list[_CubeState] = []
        for idx in rng.permutation(X.shape[0]):
            point = X[idx]
            if any(st.cube.contains_closed(point) for st in states):
                continue  # re-draw: the point already lies inside a cube
            states.append(_CubeState(cube=Hypercube.from_bounds(point, point), seed_index=int(idx)))
            if len(states) == self.n_initial:
                return states
        raise ValueError(
            f"could not place {self.n_initial} distinct seed cubes on {X.shape[0]} samples"
        )

    def fit(self, X, y=None):
        if self.predictor is None:
            raise ValueError(
                "IterRuleExtractor queries the black box on generated points and "
                "therefore requires a predictor"
            )
        check_predictor(self.predictor)
        X, preds, domain, names = self._start_fit(X, y)
        if self.n_initial < 1:
            raise ValueError("n_initial must be at least 1")
        if self.update_width <= 0:
            raise ValueError("update_width must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.points_per_cube < 1:
            raise ValueError("points_per_cube must be at least 1")

        rng = np.random.default_rng(self.seed)
        states = self._seed_cubes(X, rng)
        for st in states:
            st.pred_sum = float(preds[st.seed_index])
            st.pred_count = 1

        slab_cache: dict[bytes, tuple[float, np.ndarray]] = {}
        self.iteration_log_ = []
        for _ in range(self.max_iterations):
            candidates = []
            counts = []
            for ci, st in enumerate(states):
                others = [s.cube for s in states if s is not st]
                cands = side_candidates(st.cube, others, self.update_width, domain)
                counts.append(len(cands))
                candidates.extend((ci, dim, side, slab) for dim, side, slab in cands)
            if not candidates:
                self.iteration_log_.append(
                    {"cubes": tuple(s.cube for s in states), "candidates_per_cube": tuple(counts)}
                )
                break

            missing = []
            for _, _, _, slab in candidates:
                key = np.asarray(
                    [b for iv in slab.intervals for b in (iv.lo, iv.hi)], dtype="<f8"
                ).tobytes()
                if key not in slab_cache:
                    missing.append((key, slab))
            if missing:
                # one black-box call covers every uncached slab this iteration
                stacked = np.vstack(
                    [_uniform_points(slab, self.points_per_cube, self.seed) for _, slab in missing]
                )
                values = np.asarray(self.predictor.predict(stacked), dtype=float)
                m = self.points_per_cube
                for pos, (key, _) in enumerate(missing):
                    pts = stacked[pos * m : (pos + 1) * m]
                    slab_cache[key] = (float(values[pos * m : (pos + 1) * m].mean()), pts)

            best = None
            for ci, dim, side, slab in candidates:
                key = np.asarray(
                    [b for iv in slab.intervals for b in (iv.lo, iv.hi)], dtype="<f8"
                ).tobytes()
                slab_mean, slab_points = slab_cache[key]
                score = abs(slab_mean - states[ci].mean)
                rank = (score, ci, dim, _SIDE_ORDER[side])
                if score <= self.threshold and (best is None or rank < best[0]):
                    best = (rank, ci, slab, slab_mean, slab_points)

            if best is None:
                self.iteration_log_.append(
                    {"cubes": tuple(s.cube for s in states), "candidates_per_cube": tuple(counts)}
                )
                break
            _, ci, slab, slab_mean, slab_points = best
            st = states[ci]
            st.cube = st.cube.merge_adjacent(slab)
            st.points.append(slab_points)
            st.pred_sum += slab_mean * self.points_per_cube
            st.pred_count += self.points_per_cube
            self.iteration_log_.append(
                {"cubes": tuple(s.cube for s in states), "candidates_per_cube": tuple(counts)}
            )

        rules = []
        for st in states:
            inside = st.cube.contains_batch(X, domain)
            inside[st.seed_index] = True  # a zero-width seed misses its own point
            pts = [X[inside]] + st.points
            values = np.asarray(self.predictor.predict(np.vstack(pts)), dtype=float)
            rules.append(Rule(region=Region(outer=st.cube), output=Constant(float(values.mean()))))

        self.cubes_ = [st.cube for st in states]
        self.theory_ = Theory(
            rules=tuple(rules),
            default_output=Constant(float(np.mean(preds))),
            feature_names=names,
            domain=domain,
        )
        return self
