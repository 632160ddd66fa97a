"""Clustering accuracy, memory accounting and the parameter-sweep harness."""
from __future__ import annotations

import itertools
import logging
import math
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Hashable, List, Mapping, Optional, Sequence, Tuple, Union

from .baselines import Squeezer, distinct_count, kmodes_fit
from .clusterer import ClustererConfig, ClusterModel, ModelSnapshot, feed, resolve_missing
from .lossy import space_bound

log = logging.getLogger(__name__)


@dataclass
class EvalReport:
    accuracy: float
    error: float
    absolute_error: float
    n: int
    k: int
    per_cluster_dominant: List[Tuple[int, Hashable, int]] = field(default_factory=list)
    total_entries: int = 0
    peak_entries: int = 0  # largest entry count at any point of the run
    prunings: int = 0
    elapsed: float = 0.0  # seconds, clustering only
    algorithm: str = ""
    params: dict = field(default_factory=dict)
    failure: Optional[str] = None

    def row(self) -> dict:
        """Flat dict for tabular export."""
        out = {"algorithm": self.algorithm}
        out.update(self.params)
        out.update(
            accuracy=self.accuracy, error=self.error, absolute_error=self.absolute_error,
            n=self.n, k=self.k, total_entries=self.total_entries,
            peak_entries=self.peak_entries, prunings=self.prunings,
            elapsed_ms=self.elapsed * 1000.0, failure=self.failure,
        )
        return out


def accuracy(assignments: Sequence[int], labels: Sequence[Hashable]) -> EvalReport:
    """Fraction of records carrying their cluster's dominant class label."""
    if len(assignments) != len(labels):
        raise ValueError(f"{len(assignments)} assignments but {len(labels)} labels")
    table = ContingencyTable()
    for c, y in zip(assignments, labels):
        table.add(c, y)
    return table.report()


class ContingencyTable:
    """Cluster-by-class counts, filled incrementally (memory ~ k x classes)."""

    def __init__(self):
        self.counts = defaultdict(Counter)
        self.n = 0

    def add(self, cluster: int, label: Hashable):
        self.counts[cluster][label] += 1
        self.n += 1

    def report(self) -> EvalReport:
        if not self.n:
            raise ValueError("cannot score an empty clustering")
        dominant = []
        for c in sorted(self.counts):
            counts = self.counts[c]
            top = max(counts.values())
            label = min((y for y, n in counts.items() if n == top), key=str)
            dominant.append((c, label, top))
        r = sum(a for _, _, a in dominant) / self.n
        e = 1.0 - r
        return EvalReport(r, e, e * self.n, self.n, len(self.counts), dominant)


@dataclass
class MemoryReport:
    total_entries: int
    per_cluster: List[List[int]]
    # per (cluster, attribute): None where eps*N_i < 3, else entries <= (1/eps) ln(eps N_i)
    bound_flags: List[List[Optional[bool]]]
    total_bound: Optional[float] = None  # m-scaled worst case over all clusters
    iid_bound: Optional[float] = None  # m-scaled expected bound for IID streams

    @property
    def bounds_hold(self) -> bool:
        return all(f is not False for row in self.bound_flags for f in row)


def memory_report(model: ClusterModel) -> MemoryReport:
    per_cluster = [[len(h) for h in c.attribute_histograms] for c in model.clusters]
    total = sum(map(sum, per_cluster))
    if model.config is None:
        return MemoryReport(total, per_cluster, [[None] * len(r) for r in per_cluster])
    eps = model.config.epsilon
    flags = []
    for c, counts in zip(model.clusters, per_cluster):
        bound = space_bound(eps, c.size)
        flags.append([None if bound is None else n <= bound for n in counts])
    k, m, N = model.k, model.m or 0, model.total_seen
    total_bound = None
    if k and all(eps * c.size >= 3 for c in model.clusters):
        total_bound = m * (k / eps) * (math.log(eps) + math.log(math.ceil(N / k)))
    return MemoryReport(total, per_cluster, flags, total_bound, 7 * k * m / eps)


def snapshot_entries(snap: ModelSnapshot) -> int:
    return snap.entry_count()


Grid = Union[Mapping[str, Sequence], Sequence[Mapping]]


def expand_grid(grid: Grid) -> List[dict]:
    """Cartesian product of a ``{param: [values]}`` mapping, or a list of points as-is."""
    if isinstance(grid, Mapping):
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    return [dict(p) for p in grid]


def run_streamclucd(records, labels, **params) -> EvalReport:
    config = ClustererConfig(**params)
    model = ClusterModel(config)
    outcomes = []
    peak = 0
    t0 = time.perf_counter()
    for r in records:
        outcomes.append(feed(model, r))
        if model.live_entries > peak:
            peak = model.live_entries
    elapsed = time.perf_counter() - t0
    rep = _report(outcomes, labels, model.entry_count(), model.prunings, elapsed,
                  "streamclucd", params)
    rep.peak_entries = peak
    return rep


def run_squeezer(records, labels, sim_threshold=None, max_clusters=None,
                 missing_policy="value") -> EvalReport:
    records = [resolve_missing(r, missing_policy) for r in records]
    sq = Squeezer(sim_threshold, max_clusters)
    t0 = time.perf_counter()
    outcomes = [sq.process(r) for r in records]
    elapsed = time.perf_counter() - t0
    rep = _report(outcomes, labels, sq.entry_count(), 0, elapsed, "squeezer",
                  {"sim_threshold": sim_threshold, "max_clusters": max_clusters})
    rep.peak_entries = rep.total_entries  # nothing is ever deleted
    return rep


def run_kmodes(records, labels, k, max_iter=100) -> EvalReport:
    records = [resolve_missing(r) for r in records]
    cap = distinct_count(records)
    if k > cap:
        log.warning("k=%d exceeds the %d distinct records; capping", k, cap)
        k = cap
    t0 = time.perf_counter()
    res = kmodes_fit(records, k, max_iter)
    elapsed = time.perf_counter() - t0
    rep = accuracy(res.assignments, labels)
    return replace(rep, elapsed=elapsed, algorithm="kmodes",
                   params={"k": k, "max_iter": max_iter, "iterations": res.iterations})


def _report(outcomes, labels, entries, prunings, elapsed, algorithm, params) -> EvalReport:
    kept = [(o.cluster_index, y) for o, y in zip(outcomes, labels) if o.error is None]
    if kept:
        rep = accuracy([c for c, _ in kept], [y for _, y in kept])
    else:
        rep = EvalReport(float("nan"), float("nan"), float("nan"), 0, 0)
    return replace(rep, total_entries=entries, prunings=prunings, elapsed=elapsed,
                   algorithm=algorithm, params=dict(params))


def sweep(algorithm: str, grid: Grid, records: Sequence[Sequence],
          labels: Sequence[Hashable], **fixed) -> List[EvalReport]:
    """Run ``algorithm`` once per grid point; failures are recorded, not raised.

    k-modes points take ``sim_threshold`` and run a paired Squeezer to pick
    ``k`` (its cluster count), unless ``k`` is given explicitly.
    """
    points = expand_grid(grid)
    if not points:
        raise ValueError("empty parameter grid")
    reports = []
    for point in points:
        params = {**fixed, **point}
        try:
            if algorithm == "streamclucd":
                rep = run_streamclucd(records, labels, **params)
            elif algorithm == "squeezer":
                rep = run_squeezer(records, labels, **params)
            elif algorithm == "kmodes":
                k = params.pop("k", None)
                if k is None:
                    sq = run_squeezer(records, labels, params.get("sim_threshold"),
                                      params.get("max_clusters"),
                                      params.get("missing_policy", "value"))
                    k = sq.k
                rep = run_kmodes(records, labels, k, params.get("max_iter", 100))
                rep.params.update({key: v for key, v in point.items() if key != "k"})
            else:
                raise ValueError(f"unknown algorithm {algorithm!r}")
        except Exception as exc:  # noqa: BLE001 - recorded per grid point
            log.warning("%s failed at %s: %s", algorithm, point, exc)
            rep = EvalReport(float("nan"), float("nan"), float("nan"), 0, 0,
                             algorithm=algorithm, params=dict(point), failure=str(exc))
        reports.append(rep)
    return reports
