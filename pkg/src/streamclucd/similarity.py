"""Mismatch distances between records, record sets and histograms."""
from __future__ import annotations

from typing import Hashable, Optional, Sequence

from .lossy import ClusterHistogram, LossyParams, estimated_frequency

# Marker for an absent cell.  Records are plain tuples of tokens, floats or MISSING.
MISSING = None

Record = Sequence[Optional[Hashable]]


def delta(x: Hashable, y: Hashable) -> int:
    if x is MISSING or y is MISSING:
        raise ValueError("delta is undefined for missing cells; resolve the missing-value policy first")
    return 0 if x == y else 1


def record_distance(x: Record, y: Record) -> int:
    if len(x) != len(y):
        raise ValueError(f"arity mismatch: {len(x)} != {len(y)}")
    return sum(delta(a, b) for a, b in zip(x, y))


def set_distance(records: Sequence[Record], y: Record) -> float:
    """Average mismatch count between ``y`` and each member of ``records``."""
    if not records:
        raise ValueError("average distance to an empty set is undefined")
    return sum(record_distance(x, y) for x in records) / len(records)


def _require_members(hist: ClusterHistogram):
    if hist.size < 1:
        raise ValueError("cluster is empty")


def histogram_distance(hist: ClusterHistogram, y: Record, params: LossyParams) -> float:
    """Mismatch mass of ``y`` against the qualifying entries, divided by ``N_i``."""
    _require_members(hist)
    thr = params.threshold(hist.size)
    total = 0
    for attr_hist, v in zip(hist.attribute_histograms, y):
        if v is MISSING:
            continue
        total += sum(e.f for e in attr_hist.values() if e.f >= thr and e.value != v)
    return total / hist.size


def histogram_similarity(hist: ClusterHistogram, y: Record, params: LossyParams) -> float:
    """Matched qualifying mass of ``y`` divided by ``N_i``; lies in ``[0, m]``.

    Only the entry for ``y_j`` is looked at per attribute, and it counts only
    if ``f >= (s - eps) N_i``.  Missing cells contribute nothing.
    """
    _require_members(hist)
    if len(y) != hist.m:
        raise ValueError(f"arity mismatch: record has {len(y)} cells, histogram {hist.m}")
    thr = params.threshold(hist.size)
    total = 0
    for attr_hist, v in zip(hist.attribute_histograms, y):
        if v is MISSING:
            continue
        f = estimated_frequency(attr_hist, v)
        if f and f >= thr:
            total += f
    return total / hist.size
