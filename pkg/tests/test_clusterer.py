import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import records
from streamclucd.baselines import squeezer_run
from streamclucd.clusterer import (MISSING_TOKEN, ClustererConfig, ClusterModel,
                                   ConfigError, best_index, feed, preprocess,
                                   process_record, run_stream, selection_score, similarities,
                                   snapshot)
from streamclucd.datagen import GenSpec, generate
from streamclucd.evaluation import accuracy, memory_report
from streamclucd.similarity import MISSING


def numeric_model(bin_width, kinds=("numeric",)):
    return ClusterModel(ClustererConfig(epsilon=0.1, bin_width=bin_width, schema=kinds))


class TestConfig:
    @pytest.mark.parametrize("eps", [0.0, 1.0, 2.0])
    def test_epsilon_range(self, eps):
        with pytest.raises(ConfigError):
            ClustererConfig(epsilon=eps)

    def test_support_range(self):
        with pytest.raises(ConfigError):
            ClustererConfig(epsilon=0.1, support=1.0)

    def test_bin_width_needed_for_numeric(self):
        with pytest.raises(ConfigError):
            ClustererConfig(epsilon=0.1, schema=("numeric", "categorical"))
        with pytest.raises(ConfigError):
            ClustererConfig(epsilon=0.1, bin_width=1.0, schema=("categorical",))

    def test_sim_threshold_at_most_m(self):
        with pytest.raises(ConfigError):
            ClustererConfig(epsilon=0.1, sim_threshold=3, schema=("categorical",) * 2)
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=3))
        with pytest.raises(ConfigError):
            process_record(model, ("a", "b"))

    def test_bad_values(self):
        for kw in ({"sim_threshold": -1}, {"max_clusters": 0}, {"balance_beta": -0.5},
                   {"bin_width": 0.0}):
            with pytest.raises(ConfigError):
                ClustererConfig(epsilon=0.1, **kw)

    def test_default_threshold_is_half_m(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1))
        process_record(model, ("a",) * 6)
        assert model.sim_threshold == 3


class TestPreprocess:
    def test_bins(self):
        model = numeric_model(1.0)
        assert preprocess((0.0,), model) == ("bin:0",)
        assert preprocess((2.3,), model) == ("bin:2",)

    def test_negative_bin(self):
        model = numeric_model(2.0)
        assert preprocess((5.0,), model) == ("bin:0",)
        assert preprocess((1.0,), model) == ("bin:-2",)
        assert model.bin_origins == {0: 5.0}

    def test_mixed_schema(self):
        model = numeric_model(10.0, ("categorical", "numeric"))
        assert preprocess(("a", 3.0), model) == ("a", "bin:0")
        assert preprocess(("b", 25.0), model) == ("b", "bin:2")

    def test_missing_policies(self):
        as_value = ClusterModel(ClustererConfig(epsilon=0.1))
        ignore = ClusterModel(ClustererConfig(epsilon=0.1, missing_policy="ignore"))
        assert preprocess(("a", MISSING), as_value) == ("a", MISSING_TOKEN)
        assert preprocess(("a", MISSING), ignore) == ("a", MISSING)

    def test_arity_against_schema(self):
        model = numeric_model(1.0, ("numeric", "categorical"))
        with pytest.raises(ValueError):
            preprocess((1.0,), model)


class TestProcessRecord:
    def test_first_record(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=2))
        o = process_record(model, ("a", "b", "c"))
        assert (o.cluster_index, o.created_new) == (0, True)

    def test_identical_record_joins(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=2))
        process_record(model, ("a", "b", "c"))
        o = process_record(model, ("a", "b", "c"))
        assert (o.cluster_index, o.created_new, o.best_similarity) == (0, False, 3.0)

    def test_disjoint_record_opens_cluster(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=2))
        process_record(model, ("a", "b", "c"))
        o = process_record(model, ("x", "y", "z"))
        assert (o.cluster_index, o.created_new, o.best_similarity) == (1, True, 0.0)

    def test_threshold_is_strict(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=2))
        process_record(model, ("a", "b", "c"))
        o = process_record(model, ("a", "b", "z"))  # Sim == 2
        assert o.created_new

    def test_ties_go_to_lowest_index(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=0.5))
        process_record(model, ("a", "x"))
        process_record(model, ("b", "y"))
        o = process_record(model, ("a", "y"))
        assert o.cluster_index == 0

    def test_max_clusters_forces_absorption(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, sim_threshold=2, max_clusters=2))
        for r in [("a", "a", "a"), ("b", "b", "b"), ("c", "c", "c"), ("a", "q", "q")]:
            o = process_record(model, r)
        assert model.k == 2
        assert o.cluster_index == 0 and not o.created_new

    def test_arity_mismatch_is_reported(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1))
        process_record(model, ("a", "b"))
        o = process_record(model, ("a",))
        assert o.error and o.cluster_index == -1
        assert model.total_seen == 1 and model.rejected == 1
        o = process_record(model, ("a", "b"))
        assert o.record_index == 2

    def test_feed_reports_schema_errors(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, bin_width=1.0, schema=("numeric",)))
        o = feed(model, ("abc",))
        assert o.error and model.rejected == 1

    def test_ignore_policy_skips_missing_cells(self):
        model = ClusterModel(ClustererConfig(epsilon=0.01, sim_threshold=0.5,
                                             missing_policy="ignore"))
        feed(model, ("a", MISSING))
        feed(model, ("a", "b"))
        h = model.clusters[0]
        assert h.size == 2
        assert {v: e.f for v, e in h.attribute_histograms[1].items()} == {"b": 1}

    def test_pruning_follows_cluster_clock(self):
        model = ClusterModel(ClustererConfig(epsilon=0.5, sim_threshold=0.5))
        for r in [("a", "x"), ("a", "y")]:
            process_record(model, r)
        # size 2 hits the boundary: the two singletons in attribute 1 go
        h = model.clusters[0]
        assert h.prune_count == 1
        assert h.attribute_histograms[1] == {}
        assert model._index[1] == {}


class TestSelection:
    def test_beta_zero(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1))
        assert selection_score(0.7, 123, model) == 0.7

    def test_small_cluster_favoured(self):
        model = ClusterModel(ClustererConfig(epsilon=0.1, balance_beta=1.0))
        model.total_seen = 40
        model.clusters = [None, None]
        assert selection_score(1.0, 10, model) == pytest.approx(2.0)
        assert selection_score(1.0, 30, model) == pytest.approx(2 / 3)
        assert selection_score(1.0, 20, model) == pytest.approx(1.0)

    def test_balance_changes_candidate_not_threshold(self):
        cfg = ClustererConfig(epsilon=0.01, sim_threshold=0.5, balance_beta=1.0)
        model = ClusterModel(cfg)
        for r in [("a", "x")] * 6 + [("b", "y")] * 2:
            process_record(model, r)
        assert [c.size for c in model.clusters] == [6, 2]
        o = process_record(model, ("a", "y"))  # sims 1.0 vs 1.0, cluster 1 is smaller
        assert o.cluster_index == 1

    @settings(max_examples=500)
    @given(st.lists(st.integers(0, 2000), min_size=1, max_size=20), st.integers(1, 100),
           st.floats(1e-2, 1e2))
    def test_argmax_scale_invariant(self, masses, size, c):
        # similarities are always matched mass over a cluster size
        scores = [n / size for n in masses]
        assert best_index([s * c for s in scores]) == best_index(scores)

    def test_best_index_tie(self):
        assert best_index([1.0, 3.0, 3.0]) == 1


def _streams(max_len=60, max_m=4):
    return st.integers(1, max_m).flatmap(
        lambda m: st.lists(records(m, "abc"), max_size=max_len))


class TestRunStream:
    def test_empty(self):
        model, outcomes = run_stream(ClustererConfig(epsilon=0.1), [])
        assert model.k == 0 and outcomes == []

    def test_separated_classes(self):
        rows, labels = generate(GenSpec(rows=400, attrs=6, classes=2, purity=1.0, seed=3))
        model, outcomes = run_stream(ClustererConfig(epsilon=0.05), rows)
        assert model.k == 2
        assert accuracy([o.cluster_index for o in outcomes], labels).accuracy == 1.0

    def test_reads_each_record_once(self):
        rows, _ = generate(GenSpec(rows=300, attrs=4, classes=3, seed=1))
        pulls = []

        def source():
            for r in rows:
                pulls.append(1)
                yield r

        _, outcomes = run_stream(ClustererConfig(epsilon=0.1), source())
        assert len(pulls) == len(rows) == len(outcomes)

    @settings(max_examples=1000)
    @given(_streams(), st.sampled_from([0.5, 0.2, 0.05]), st.sampled_from([None, 1, 3]),
           st.sampled_from([0.0, 1.0]))
    def test_conservation(self, rows, eps, mc, beta):
        cfg = ClustererConfig(epsilon=eps, max_clusters=mc, balance_beta=beta)
        model = ClusterModel(cfg)
        for i, r in enumerate(rows, 1):
            o = feed(model, r)
            assert sum(c.size for c in model.clusters) == model.total_seen == i
            assert model.live_entries == model.entry_count()
            if mc is not None:
                assert model.k <= mc
            if o.created_new and model.k > 1:
                assert o.best_similarity <= model.sim_threshold

    @settings(max_examples=200)
    @given(_streams(max_len=120, max_m=5))
    def test_exact_mode_equals_squeezer(self, rows):
        cfg = ClustererConfig.exact(max(len(rows), 1))
        model, outcomes = run_stream(cfg, rows)
        sq_model, sq_outcomes = squeezer_run(None, rows)
        assert [o.cluster_index for o in outcomes] == [o.cluster_index for o in sq_outcomes]
        assert snapshot(model).clusters == snapshot(sq_model).clusters

    @settings(max_examples=200)
    @given(_streams(max_len=150, max_m=4))
    def test_index_matches_direct_similarity(self, rows):
        from streamclucd.similarity import histogram_similarity
        model = ClusterModel(ClustererConfig(epsilon=0.1, support=0.2))
        for r in rows:
            if model.k:
                direct = [histogram_similarity(c, r, model.config.params) for c in model.clusters]
                assert similarities(model, r) == pytest.approx(direct)
            process_record(model, r)


class TestSnapshot:
    def test_empty(self):
        snap = snapshot(ClusterModel(ClustererConfig(epsilon=0.1)))
        assert snap.clusters == () and snap.total_seen == 0

    def test_immutable(self):
        rows, _ = generate(GenSpec(rows=300, attrs=5, classes=3, seed=2))
        model = ClusterModel(ClustererConfig(epsilon=0.1))
        for r in rows[:200]:
            feed(model, r)
        snap = snapshot(model)
        before = snap.to_dict()
        for r in rows[200:]:
            feed(model, r)
        assert snap.to_dict() == before
        assert snapshot(model).total_seen == 300

    def test_entry_counts_agree(self):
        rows, _ = generate(GenSpec(rows=2000, attrs=8, classes=4, seed=4))
        model, _ = run_stream(ClustererConfig(epsilon=0.05), rows)
        assert snapshot(model).entry_count() == memory_report(model).total_entries == model.entry_count()

    def test_round_trip(self):
        rows, _ = generate(GenSpec(rows=500, attrs=4, classes=3, seed=9))
        model, _ = run_stream(ClustererConfig(epsilon=0.1), rows)
        snap = snapshot(model)
        from streamclucd.clusterer import ModelSnapshot
        assert ModelSnapshot.from_dict(snap.to_dict()) == snap


class TestSpace:
    def test_total_bound(self):
        rows, _ = generate(GenSpec(rows=20000, attrs=10, classes=5, domain_size=200, seed=11))
        eps = 0.02
        model, _ = run_stream(ClustererConfig(epsilon=eps, max_clusters=5), rows)
        assert all(eps * c.size >= 3 for c in model.clusters)
        k, m, N = model.k, 10, len(rows)
        bound = m * (k / eps) * (math.log(eps) + math.log(math.ceil(N / k)))
        report = memory_report(model)
        assert report.total_bound == pytest.approx(bound)
        assert report.total_entries <= bound
        assert report.bounds_hold
