import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import absorb_all, stream_into
from streamclucd.lossy import (ClusterHistogram, LossyEntry, LossyParams, at_bucket_boundary,
                               entry_count, estimated_frequency, observe, prune,
                               qualifying_entries, space_bound)


class TestParams:
    def test_bucket_width(self):
        assert LossyParams(0.25).bucket_width == 4
        assert LossyParams(0.001).bucket_width == 1000
        assert LossyParams(0.3).bucket_width == 4

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
    def test_epsilon_range(self, eps):
        with pytest.raises(ValueError):
            LossyParams(eps)

    @pytest.mark.parametrize("s", [-0.1, 1.0])
    def test_support_range(self, s):
        with pytest.raises(ValueError):
            LossyParams(0.001, s)

    def test_epsilon_above_support_rejected(self):
        with pytest.raises(ValueError):
            LossyParams(0.2, 0.1)

    def test_exact(self):
        p = LossyParams.exact(100)
        assert p.epsilon == p.support
        assert p.epsilon < 1 / 100
        assert p.bucket_width == 101

    @given(st.floats(1e-4, 0.99))
    def test_bucket_width_is_ceil(self, eps):
        assert LossyParams(eps).bucket_width == math.ceil(1 / eps)


class TestObserve:
    def test_first_entry(self):
        h = ClusterHistogram.empty(1)
        h.size = 1
        observe(h, 0, "a", LossyParams(0.25))
        assert h.attribute_histograms[0]["a"].as_triple() == ("a", 1, 0)

    def test_increment(self):
        h = ClusterHistogram([{"a": LossyEntry("a", 2, 0)}], size=3)
        observe(h, 0, "a", LossyParams(0.25))
        assert h.attribute_histograms[0]["a"].as_triple() == ("a", 3, 0)

    def test_new_entry_in_second_bucket(self):
        h = ClusterHistogram.empty(1)
        h.size = 5
        observe(h, 0, "b", LossyParams(0.25))
        assert h.attribute_histograms[0]["b"].as_triple() == ("b", 1, 1)

    def test_attr_out_of_range(self):
        h = ClusterHistogram.empty(2)
        h.size = 1
        with pytest.raises(IndexError):
            observe(h, 2, "a", LossyParams(0.5))

    @settings(max_examples=200)
    @given(st.lists(st.sampled_from("abcde"), max_size=200), st.sampled_from([0.5, 0.25, 0.1]))
    def test_delta_fixed_while_entry_lives(self, values, eps):
        p = LossyParams(eps)
        h = ClusterHistogram.empty(1)
        born = {}
        for v in values:
            h.size += 1
            observe(h, 0, v, p)
            hist = h.attribute_histograms[0]
            if v not in born:
                born[v] = hist[v].delta
            if at_bucket_boundary(h, p):
                prune(h, p)
            born = {k: d for k, d in born.items() if k in hist}
            assert all(hist[k].delta == d for k, d in born.items())

    def test_reinserted_entry_gets_new_delta(self):
        p = LossyParams(0.25)
        h = stream_into(["x"] * 3 + ["a"] * 6, p)
        # "a" first arrives at size 4 and is pruned right away, then returns in bucket 2
        assert h.attribute_histograms[0]["a"].as_triple() == ("a", 5, 1)


class TestPrune:
    def test_empty(self):
        h, removed = prune(ClusterHistogram.empty(3), LossyParams(0.5))
        assert removed == 0 and entry_count(h) == 0

    def test_heavy_entry_kept(self):
        p = LossyParams(0.5)
        h = ClusterHistogram.empty(1)
        for v in "aa":
            h.size += 1
            observe(h, 0, v, p)
        _, removed = prune(h, p)
        assert removed == 0
        assert h.attribute_histograms[0]["a"].as_triple() == ("a", 2, 0)
        assert h.prune_count == 1

    def test_light_entries_dropped(self):
        p = LossyParams(0.5)
        h = ClusterHistogram.empty(1)
        for v in "ab":
            h.size += 1
            observe(h, 0, v, p)
        _, removed = prune(h, p)
        assert removed == 2
        assert h.attribute_histograms[0] == {}

    def test_on_remove_callback(self):
        p = LossyParams(0.5)
        h = ClusterHistogram.empty(2)
        h.size = 2
        observe(h, 0, "a", p)
        observe(h, 1, "b", p)
        seen = []
        prune(h, p, on_remove=lambda j, e: seen.append((j, e.value)))
        assert sorted(seen) == [(0, "a"), (1, "b")]

    @settings(max_examples=300)
    @given(st.lists(st.sampled_from("abcdefgh"), max_size=300), st.sampled_from([0.5, 0.25, 0.1, 0.05]))
    def test_survivors_exceed_bucket(self, values, eps):
        p = LossyParams(eps)
        h = ClusterHistogram.empty(1)
        for v in values:
            h.size += 1
            observe(h, 0, v, p)
            if at_bucket_boundary(h, p):
                prune(h, p)
                b = p.current_bucket(h.size)
                assert all(e.f + e.delta > b for e in h.attribute_histograms[0].values())


class TestQueries:
    def test_support_zero_returns_all(self):
        hist = {"x": LossyEntry("x", 3, 0), "y": LossyEntry("y", 1, 0)}
        assert sorted(qualifying_entries(hist, LossyParams(0.2), 4)) == [("x", 3), ("y", 1)]

    def test_threshold(self):
        p = LossyParams(0.001, 0.5)
        assert p.threshold(4) == pytest.approx(1.996, abs=1e-12)
        hist = {"x": LossyEntry("x", 3, 0), "y": LossyEntry("y", 1, 0)}
        assert qualifying_entries(hist, p, 4) == [("x", 3)]

    def test_exact_mode_returns_everything(self):
        p = LossyParams.exact(50)
        h = stream_into(list("abcabcaad") * 5, p)
        full = sorted((e.value, e.f) for e in h.attribute_histograms[0].values())
        assert sorted(qualifying_entries(h.attribute_histograms[0], p, h.size)) == full

    def test_estimated_frequency(self):
        hist = {"x": LossyEntry("x", 3, 0)}
        assert estimated_frequency(hist, "x") == 3
        assert estimated_frequency(hist, "z") == 0

    def test_entry_count(self):
        assert entry_count(ClusterHistogram.empty(4)) == 0
        p = LossyParams(0.01)
        h = absorb_all([tuple(f"v{j}" for j in range(22))], p)
        assert entry_count(h) == 22

    def test_entry_count_is_distinct_values_in_exact_mode(self):
        rows = [("a", "x"), ("b", "x"), ("a", "y"), ("c", "x")]
        h = absorb_all(rows, LossyParams.exact(len(rows)))
        assert entry_count(h) == 3 + 2

    def test_undercount_bound_on_long_stream(self):
        import random
        rng = random.Random(7)
        values = [rng.choice("abcdefghijklmnopqrst") if rng.random() < 0.5 else rng.randrange(5000)
                  for _ in range(10000)]
        p = LossyParams(0.01)
        h = stream_into(values, p)
        true = Counter(values)
        for v, n in true.items():
            assert 0 <= n - estimated_frequency(h.attribute_histograms[0], v) <= 0.01 * 10000


class TestSpaceBound:
    def test_not_asserted_for_small_clusters(self):
        assert space_bound(0.1, 29) is None
        assert space_bound(0.1, 30) == pytest.approx(math.log(3) / 0.1)

    @settings(max_examples=100)
    @given(st.lists(st.integers(0, 400), min_size=1, max_size=3000), st.sampled_from([0.1, 0.05, 0.02]))
    def test_entries_within_bound(self, values, eps):
        p = LossyParams(eps)
        h = ClusterHistogram.empty(1)
        for v in values:
            h.size += 1
            observe(h, 0, v, p)
            if at_bucket_boundary(h, p):
                prune(h, p)
            bound = space_bound(eps, h.size)
            if bound is not None:
                assert len(h.attribute_histograms[0]) <= bound


class TestGuarantees:
    @settings(max_examples=300)
    @given(st.lists(st.integers(0, 30), max_size=600),
           st.sampled_from([(0.05, 0.1), (0.02, 0.1), (0.1, 0.2), (0.01, 0.05)]))
    def test_against_exact_counter(self, values, params):
        eps, s = params
        p = LossyParams(eps, s)
        h = stream_into(values, p)
        n = len(values)
        true = Counter(values)
        hist = h.attribute_histograms[0]
        out = dict(qualifying_entries(hist, p, n))
        for v, c in true.items():
            f = estimated_frequency(hist, v)
            assert 0 <= c - f <= eps * n
            if c >= s * n:
                assert v in out
        for v in out:
            assert true[v] >= (s - eps) * n
        for e in hist.values():
            assert e.f <= true[e.value] <= e.f + e.delta

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 20), max_size=300))
    def test_exact_mode_never_prunes(self, values):
        p = LossyParams.exact(max(len(values), 1))
        h = stream_into(values, p)
        assert {v: e.f for v, e in h.attribute_histograms[0].items()} == Counter(values)
        assert h.prune_count == 0
