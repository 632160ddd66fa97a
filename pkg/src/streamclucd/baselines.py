"""Comparison algorithms: exact Squeezer and (chunked) k-modes."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import islice, repeat
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .clusterer import AssignmentOutcome, ClusterModel
from .lossy import ClusterHistogram, LossyEntry
from .similarity import MISSING

log = logging.getLogger(__name__)


class Squeezer:
    """Exact-count Squeezer: no pruning, every histogram entry contributes.

    Kept deliberately plain (one dict of counts per cluster and attribute) so
    that it can serve as an independent check on the lossy clusterer.
    """

    def __init__(self, sim_threshold: Optional[float] = None, max_clusters: Optional[int] = None):
        self.sim_threshold = sim_threshold
        self.max_clusters = max_clusters
        self.m: Optional[int] = None
        self.sizes: List[int] = []
        self.counts: List[List[Dict[Hashable, int]]] = []
        self.seen = 0

    @property
    def threshold(self) -> float:
        return self.m / 2 if self.sim_threshold is None else self.sim_threshold

    def process(self, record: Sequence) -> AssignmentOutcome:
        idx = self.seen
        self.seen += 1
        if self.m is None:
            self.m = len(record)
        if len(record) != self.m:
            return AssignmentOutcome(idx, -1, False, float("nan"),
                                     error=f"arity mismatch: expected {self.m} cells, got {len(record)}")
        if not self.sizes:
            self._add(self._new_cluster(), record)
            return AssignmentOutcome(idx, 0, True, 0.0)

        best, best_sim = 0, -1.0
        for i, hists in enumerate(self.counts):
            # MISSING is never stored as a key, so it contributes 0
            sim = sum(map(dict.get, hists, record, repeat(0))) / self.sizes[i]
            if sim > best_sim:
                best, best_sim = i, sim
        mc = self.max_clusters
        if best_sim > self.threshold or (mc is not None and len(self.sizes) >= mc):
            self._add(best, record)
            return AssignmentOutcome(idx, best, False, best_sim)
        new = self._new_cluster()
        self._add(new, record)
        return AssignmentOutcome(idx, new, True, best_sim)

    def reject(self, message: str) -> AssignmentOutcome:
        idx = self.seen
        self.seen += 1
        return AssignmentOutcome(idx, -1, False, float("nan"), error=message)

    def _new_cluster(self) -> int:
        self.sizes.append(0)
        self.counts.append([{} for _ in range(self.m)])
        return len(self.sizes) - 1

    def _add(self, ci: int, record: Sequence):
        self.sizes[ci] += 1
        for h, v in zip(self.counts[ci], record):
            if v is not MISSING:
                h[v] = h.get(v, 0) + 1

    def entry_count(self) -> int:
        return sum(len(h) for hists in self.counts for h in hists)

    def to_model(self) -> ClusterModel:
        clusters = [
            ClusterHistogram([{v: LossyEntry(v, f, 0) for v, f in h.items()} for h in hists], size)
            for hists, size in zip(self.counts, self.sizes)
        ]
        accepted = sum(self.sizes)
        return ClusterModel(None, clusters, total_seen=accepted,
                            rejected=self.seen - accepted, m=self.m,
                            live_entries=self.entry_count())


def squeezer_run(sim_threshold: Optional[float], records: Iterable[Sequence],
                 max_clusters: Optional[int] = None) -> Tuple[ClusterModel, List[AssignmentOutcome]]:
    sq = Squeezer(sim_threshold, max_clusters)
    outcomes = [sq.process(r) for r in records]
    return sq.to_model(), outcomes


@dataclass
class Mode:
    values: Tuple[Hashable, ...]
    weight: int


@dataclass
class KModesResult:
    modes: List[Mode]
    assignments: List[int]
    iterations: int
    chunk_modes: List[Mode] = field(default_factory=list)


def _encode(records: Sequence[Sequence]) -> Tuple[np.ndarray, List[list]]:
    """Integer-code each attribute; codes follow the sorted order of the tokens."""
    m = len(records[0])
    vocab = []
    X = np.empty((len(records), m), dtype=np.int64)
    for j in range(m):
        col = [r[j] for r in records]
        if any(v is MISSING for v in col):
            raise ValueError("k-modes does not accept missing cells")
        values = sorted(set(col))
        code = {v: c for c, v in enumerate(values)}
        X[:, j] = [code[v] for v in col]
        vocab.append(values)
    return X, vocab


def _first_distinct(X: np.ndarray, k: int) -> List[int]:
    seen, picked = set(), []
    for i, row in enumerate(map(tuple, X.tolist())):
        if row not in seen:
            seen.add(row)
            picked.append(i)
            if len(picked) == k:
                break
    return picked


def distinct_count(records: Iterable[Sequence]) -> int:
    return len({tuple(r) for r in records})


def _nearest(X: np.ndarray, modes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dist = (X[:, None, :] != modes[None, :, :]).sum(axis=2)
    return dist.argmin(axis=1), dist


def _repair_empty(X, modes, assign, dist, k):
    """Reseed each empty cluster with the record farthest from its own mode."""
    sizes = np.bincount(assign, minlength=k)
    for c in np.flatnonzero(sizes == 0):
        own = dist[np.arange(len(X)), assign].astype(float)
        own[sizes[assign] <= 1] = -1.0  # never empty another cluster
        i = int(own.argmax())
        sizes[assign[i]] -= 1
        assign[i] = c
        sizes[c] = 1
        modes[c] = X[i]
    return assign


def _update_modes(X, assign, weights, modes, vocab_sizes, k):
    new = modes.copy()
    for j, nv in enumerate(vocab_sizes):
        counts = np.zeros((k, nv))
        np.add.at(counts, (assign, X[:, j]), weights)
        filled = counts.sum(axis=1) > 0
        # argmax takes the first maximum, i.e. the lexicographically smallest token
        new[filled, j] = counts[filled].argmax(axis=1)
    return new


def kmodes_fit(records: Sequence[Sequence], k: int, max_iter: int = 100,
               weights: Optional[Sequence[int]] = None) -> KModesResult:
    """k-modes, seeded with the first ``k`` distinct records.

    With ``weights`` each record counts with that multiplicity in the mode
    update; assignment is unaffected.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if len(records) == 0:
        raise ValueError("no records to cluster")
    X, vocab = _encode(records)
    w = np.ones(len(X)) if weights is None else np.asarray(weights, dtype=float)
    seeds = _first_distinct(X, k)
    if len(seeds) < k:
        raise ValueError(f"need at least {k} distinct records, found {len(seeds)}")
    modes = X[seeds].copy()
    vocab_sizes = [len(v) for v in vocab]

    assign, dist = _nearest(X, modes)
    assign = _repair_empty(X, modes, assign, dist, k)
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        modes = _update_modes(X, assign, w, modes, vocab_sizes, k)
        new, dist = _nearest(X, modes)
        new = _repair_empty(X, modes, new, dist, k)
        if np.array_equal(new, assign):
            break
        assign = new

    cluster_weight = np.bincount(assign, weights=w, minlength=k)
    result_modes = [
        Mode(tuple(vocab[j][modes[c, j]] for j in range(X.shape[1])), int(round(cluster_weight[c])))
        for c in range(k)
    ]
    return KModesResult(result_modes, assign.tolist(), iterations)


def chunked_kmodes_stream(records: Iterable[Sequence], k: int, chunk_size: int = 1000,
                          max_iter: int = 100) -> KModesResult:
    """Cluster each chunk to ``k`` weighted modes, then cluster the retained modes.

    Records are never revisited: each one reaches its final cluster through
    the chunk-level mode it was assigned to.
    """
    if chunk_size < k:
        raise ValueError("chunk_size must be at least k")
    it = iter(records)
    chunk_modes: List[Mode] = []
    via_mode: List[int] = []
    while True:
        chunk = list(islice(it, chunk_size))
        if not chunk:
            break
        kk = min(k, distinct_count(chunk))
        if kk < k:
            log.warning("chunk has only %d distinct records; clustering it into %d modes", kk, kk)
        res = kmodes_fit(chunk, kk, max_iter)
        offset = len(chunk_modes)
        chunk_modes.extend(res.modes)
        via_mode.extend(offset + a for a in res.assignments)
    if not chunk_modes:
        raise ValueError("no records to cluster")

    values = [md.values for md in chunk_modes]
    kf = min(k, distinct_count(values))
    if kf < k:
        log.warning("only %d distinct chunk modes; final clustering uses k=%d", kf, kf)
    final = kmodes_fit(values, kf, max_iter, weights=[md.weight for md in chunk_modes])
    assignments = [final.assignments[c] for c in via_mode]
    return KModesResult(final.modes, assignments, final.iterations, chunk_modes)
