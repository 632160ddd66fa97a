"""Per-cluster attribute histograms kept under the Lossy Counting discipline.

Every stored entry is a triple ``(value, f, delta)``: ``f`` counts the
occurrences of ``value`` since the entry was created, ``delta`` bounds how
many earlier occurrences may have been dropped.  Each cluster runs its own
bucket clock derived from its size ``N_i``; buckets are ``w = ceil(1/eps)``
records wide and pruning happens whenever ``N_i`` hits a bucket boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Tuple


class LossyEntry:
    __slots__ = ("value", "f", "delta")

    def __init__(self, value: Hashable, f: int = 1, delta: int = 0):
        self.value = value
        self.f = f
        self.delta = delta

    def as_triple(self) -> Tuple[Hashable, int, int]:
        return (self.value, self.f, self.delta)

    def __eq__(self, other):
        if not isinstance(other, LossyEntry):
            return NotImplemented
        return self.as_triple() == other.as_triple()

    def __repr__(self):
        return f"LossyEntry({self.value!r}, f={self.f}, delta={self.delta})"


# One attribute's histogram: value -> entry.  Iteration order carries no meaning.
AttributeHistogram = Dict[Hashable, LossyEntry]


@dataclass(frozen=True)
class LossyParams:
    """Error bound ``epsilon``, support threshold ``support`` and the derived bucket width.

    ``support`` must not be below ``epsilon`` except for ``support == 0``,
    which simply lets every stored entry qualify.  The exact (Squeezer)
    configuration is ``support == epsilon`` with ``epsilon < 1/N``.
    """

    epsilon: float
    support: float = 0.0
    bucket_width: int = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not 0.0 <= self.support < 1.0:
            raise ValueError(f"support must lie in [0, 1), got {self.support!r}")
        if self.support != 0.0 and self.epsilon > self.support:
            raise ValueError(
                f"epsilon ({self.epsilon}) may not exceed support ({self.support}) "
                "unless support is 0"
            )
        object.__setattr__(self, "bucket_width", math.ceil(1.0 / self.epsilon))

    @classmethod
    def exact(cls, max_records: int) -> "LossyParams":
        """Parameters under which nothing is ever pruned for streams of up to ``max_records``."""
        eps = 1.0 / (max_records + 1)
        return cls(epsilon=eps, support=eps)

    def threshold(self, cluster_size: int) -> float:
        # Entries with f below this do not contribute to similarity.
        return (self.support - self.epsilon) * cluster_size

    def current_bucket(self, cluster_size: int) -> int:
        return -(-cluster_size // self.bucket_width)


@dataclass
class ClusterHistogram:
    """Compact representation of one cluster: ``m`` attribute histograms and its size."""

    attribute_histograms: List[AttributeHistogram]
    size: int = 0
    prune_count: int = 0

    @classmethod
    def empty(cls, m: int) -> "ClusterHistogram":
        return cls([{} for _ in range(m)])

    @property
    def m(self) -> int:
        return len(self.attribute_histograms)


def observe(hist: ClusterHistogram, attr_index: int, value: Hashable,
            params: LossyParams) -> ClusterHistogram:
    """Count one occurrence of ``value`` in attribute ``attr_index``.

    The caller bumps ``hist.size`` for the record first, so a new entry gets
    ``delta = b_current - 1`` with ``b_current`` including this record.
    """
    if not 0 <= attr_index < len(hist.attribute_histograms):
        raise IndexError(f"attribute index {attr_index} out of range for m={hist.m}")
    attr_hist = hist.attribute_histograms[attr_index]
    entry = attr_hist.get(value)
    if entry is None:
        attr_hist[value] = LossyEntry(value, 1, params.current_bucket(hist.size) - 1)
    else:
        entry.f += 1
    return hist


def prune(hist: ClusterHistogram, params: LossyParams,
          on_remove: Optional[Callable[[int, LossyEntry], None]] = None,
          ) -> Tuple[ClusterHistogram, int]:
    """Drop every entry with ``f + delta <= b_current`` from all attributes.

    Meant to run when ``hist.size`` sits on a bucket boundary.  ``on_remove``
    is called with ``(attr_index, entry)`` for each deleted entry so that
    secondary indexes can follow along.
    """
    bucket = params.current_bucket(hist.size)
    removed = 0
    for j, attr_hist in enumerate(hist.attribute_histograms):
        doomed = [v for v, e in attr_hist.items() if e.f + e.delta <= bucket]
        for v in doomed:
            entry = attr_hist.pop(v)
            if on_remove is not None:
                on_remove(j, entry)
        removed += len(doomed)
    hist.prune_count += 1
    return hist, removed


def at_bucket_boundary(hist: ClusterHistogram, params: LossyParams) -> bool:
    return hist.size > 0 and hist.size % params.bucket_width == 0


def qualifying_entries(attr_hist: AttributeHistogram, params: LossyParams,
                       cluster_size: int) -> List[Tuple[Hashable, int]]:
    thr = params.threshold(cluster_size)
    return [(e.value, e.f) for e in attr_hist.values() if e.f >= thr]


def estimated_frequency(attr_hist: AttributeHistogram, value: Hashable) -> int:
    entry = attr_hist.get(value)
    return 0 if entry is None else entry.f


def entry_count(hist: ClusterHistogram) -> int:
    return sum(len(h) for h in hist.attribute_histograms)


def space_bound(epsilon: float, cluster_size: int) -> Optional[float]:
    """Worst-case entry count of one attribute histogram, ``(1/eps) ln(eps N_i)``.

    Returns None where the bound is not asserted (``eps * N_i < 3``).
    """
    if epsilon * cluster_size < 3:
        return None
    return math.log(epsilon * cluster_size) / epsilon
