import numpy as np
import pytest

from rulebox.cluster_extractor import ClusterRuleExtractor, priority_order, select_k
from rulebox.datasets import generate, single_plane_spec, tri_constant_spec, tri_linear_spec
from rulebox.theory import Linear, fit_linear


@pytest.fixture()
def l_fixture():
    """Dense square cluster inside the bounding box of an L-shaped cluster."""
    rng = np.random.default_rng(11)
    square = rng.uniform([0.45, 0.45], [0.55, 0.55], (200, 2))
    arm_bottom = rng.uniform([0.2, 0.2], [0.8, 0.4], (60, 2))
    arm_left = rng.uniform([0.2, 0.4], [0.4, 0.8], (40, 2))
    X = np.vstack([square, arm_bottom, arm_left])
    y = np.concatenate([np.full(200, 5.0), np.full(100, 1.0)])
    return X, y


class TestPriority:
    def test_more_samples_first(self):
        assert priority_order([100, 200], [0.5, 0.1]) == [1, 0]

    def test_larger_volume_breaks_count_ties(self):
        assert priority_order([100, 100], [0.1, 0.2]) == [1, 0]

    def test_full_tie_goes_to_lower_index(self):
        assert priority_order([50, 50], [0.2, 0.2]) == [0, 1]


class TestSelectK:
    def test_tri_linear_needs_three(self):
        spec = tri_linear_spec()
        ds = generate(spec, 100, seed=0)
        preds = spec.oracle().predict(ds.X)
        assert select_k(ds.X, preds, 6, output_weight=0.5, trim_fraction=0.0, seed=0) == 3

    def test_single_plane_needs_one(self):
        spec = single_plane_spec()
        ds = generate(spec, 300, seed=0)
        preds = spec.oracle().predict(ds.X)
        assert select_k(ds.X, preds, 6, output_weight=0.5, trim_fraction=0.0, seed=0) == 1

    def test_k_max_one_returns_one(self):
        spec = tri_linear_spec()
        ds = generate(spec, 50, seed=1)
        preds = spec.oracle().predict(ds.X)
        assert select_k(ds.X, preds, 1, seed=1) == 1


class TestExtraction:
    def test_tri_linear_recovers_generating_planes(self):
        spec = tri_linear_spec()
        ds = generate(spec, 100, seed=42)
        oracle = spec.oracle()
        ex = ClusterRuleExtractor(
            predictor=oracle, k=3, output_weight=0.5, trim_fraction=0.0, output="linear",
            seed=42,
        ).fit(ds.X)
        assert ex.rule_count_ == 3
        recovered = {}
        for rule in ex.theory_.rules:
            assert isinstance(rule.output, Linear)
            center = (rule.region.outer.lows + rule.region.outer.highs) / 2
            idx = next(i for i, c in enumerate(spec.cubes) if c.contains_closed(center))
            recovered[idx] = rule.output
        assert sorted(recovered) == [0, 1, 2]
        for idx, out in recovered.items():
            truth = spec.outputs[idx]
            assert out.intercept == pytest.approx(truth.intercept, abs=1e-6)
            assert np.allclose(out.coefficients, truth.coefficients, atol=1e-6)
        mae = np.abs(ex.predict(ds.X) - oracle.predict(ds.X)).mean()
        assert mae <= 1e-6

    def test_rule_count_always_equals_k(self):
        spec = tri_constant_spec()
        ds = generate(spec, 60, seed=5)
        for k in (1, 2, 3, 4):
            ex = ClusterRuleExtractor(k=k, trim_fraction=0.0, seed=5).fit(ds.X, ds.y)
            assert ex.rule_count_ == k

    def test_k1_reduces_to_global_linear_fit(self):
        spec = single_plane_spec()
        ds = generate(spec, 100, seed=3)
        ex = ClusterRuleExtractor(k=1, trim_fraction=0.0, output="linear", seed=3).fit(ds.X, ds.y)
        assert ex.rule_count_ == 1
        expected = fit_linear(ds.X, ds.y)
        assert ex.theory_.rules[0].output == expected

    def test_overlapping_cubes_get_holes_and_routing(self, l_fixture):
        X, y = l_fixture
        ex = ClusterRuleExtractor(k=2, trim_fraction=0.0, output="constant", seed=0).fit(X, y)
        first, second = ex.theory_.rules
        # the dense square wins priority and is listed first, hole-free
        assert first.output.value == pytest.approx(5.0)
        assert first.region.holes == ()
        # the L-shaped cluster's box carries the square's box as a hole
        assert second.output.value == pytest.approx(1.0)
        assert second.region.holes == (first.region.outer,)
        # every retained sample routes to its own cluster's rule
        matches = ex.match_indices(X)
        assert (matches[:200] == 0).all()
        assert (matches[200:] == 1).all()
        # points in the overlap zone get the high-priority output
        overlap_probe = np.array([[0.5, 0.5]])
        assert ex.predict(overlap_probe)[0] == pytest.approx(5.0)

    def test_trimmed_samples_fall_to_default(self):
        rng = np.random.default_rng(8)
        X = np.vstack([rng.uniform(0, 1, (99, 2)), [[5.0, 5.0]]])
        y = np.concatenate([np.full(99, 2.0), [2.0]])
        ex = ClusterRuleExtractor(k=1, trim_fraction=0.05, output="constant", seed=0).fit(X, y)
        outlier_match = ex.match_indices(np.array([[5.0, 5.0]]))
        assert outlier_match[0] == -1
        assert ex.theory_.rules[0].region.outer.highs.max() < 5.0

    def test_auto_k_on_benchmark(self):
        spec = tri_linear_spec()
        ds = generate(spec, 100, seed=42)
        ex = ClusterRuleExtractor(
            predictor=spec.oracle(), k="auto", k_max=6, output_weight=0.5,
            trim_fraction=0.0, seed=42,
        ).fit(ds.X)
        assert ex.k_ == 3

    def test_rule_order_irrelevant_for_disjoint_cubes(self):
        spec = tri_constant_spec()
        ds = generate(spec, 80, seed=6)
        ex = ClusterRuleExtractor(k=3, trim_fraction=0.0, seed=6).fit(ds.X, ds.y)
        cubes = [r.region.outer for r in ex.theory_.rules]
        for i in range(3):
            for j in range(i + 1, 3):
                assert not cubes[i].overlaps(cubes[j])
        from rulebox.theory import Theory

        rng = np.random.default_rng(10)
        probes = rng.uniform(0, 1, (10_000, 2))
        base = ex.theory_.predict(probes)
        for perm in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
            shuffled = Theory(
                rules=tuple(ex.theory_.rules[i] for i in perm),
                default_output=ex.theory_.default_output,
                feature_names=ex.theory_.feature_names,
                domain=ex.theory_.domain,
            )
            assert np.array_equal(shuffled.predict(probes), base)

    def test_determinism_byte_for_byte(self):
        spec = tri_linear_spec()
        ds = generate(spec, 60, seed=7)
        a = ClusterRuleExtractor(k="auto", k_max=4, seed=7).fit(ds.X, ds.y)
        b = ClusterRuleExtractor(k="auto", k_max=4, seed=7).fit(ds.X, ds.y)
        assert a.theory_.render(6) == b.theory_.render(6)
        assert a.theory_.to_json() == b.theory_.to_json()

    def test_k_exceeding_samples_rejected(self):
        with pytest.raises(ValueError):
            ClusterRuleExtractor(k=5).fit(np.zeros((3, 2)) + np.eye(3, 2), np.zeros(3))

    def test_needs_predictor_or_targets(self):
        with pytest.raises(ValueError):
            ClusterRuleExtractor(k=1).fit(np.zeros((3, 2)))
