"""One-pass clustering of categorical streams over lossy cluster histograms.

Each arriving record is scored against every cluster by matched qualifying
frequency mass (see :func:`streamclucd.similarity.histogram_similarity`).
It joins the best cluster if that score exceeds the similarity threshold,
otherwise it opens a new cluster (unless ``max_clusters`` is reached).
Histograms are pruned at each cluster's own bucket boundaries.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .lossy import ClusterHistogram, LossyEntry, LossyParams, entry_count, prune
from .similarity import MISSING, Record

MISSING_TOKEN = "⟨MISSING⟩"


class AttrKind(str, enum.Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"


class MissingPolicy(str, enum.Enum):
    IGNORE = "ignore"
    AS_VALUE = "value"


class ConfigError(ValueError):
    pass


@dataclass
class ClustererConfig:
    epsilon: float
    support: float = 0.0
    sim_threshold: Optional[float] = None  # None: half the attribute count
    max_clusters: Optional[int] = None
    bin_width: Optional[float] = None
    missing_policy: MissingPolicy = MissingPolicy.AS_VALUE
    balance_beta: float = 0.0
    schema: Optional[Tuple[AttrKind, ...]] = None  # None: all categorical

    def __post_init__(self):
        try:
            self.params = LossyParams(self.epsilon, self.support)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.missing_policy = MissingPolicy(self.missing_policy)
        if self.sim_threshold is not None and self.sim_threshold < 0:
            raise ConfigError("sim_threshold must be >= 0")
        if self.max_clusters is not None and self.max_clusters < 1:
            raise ConfigError("max_clusters must be a positive integer")
        if self.balance_beta < 0:
            raise ConfigError("balance_beta must be >= 0")
        if self.bin_width is not None and not self.bin_width > 0:
            raise ConfigError("bin_width must be positive")
        if self.schema is not None:
            self.schema = tuple(AttrKind(k) for k in self.schema)
            has_numeric = AttrKind.NUMERIC in self.schema
            if has_numeric and self.bin_width is None:
                raise ConfigError("bin_width is required when the schema has numeric attributes")
            if self.bin_width is not None and not has_numeric:
                raise ConfigError("bin_width given but no attribute is numeric")
            if self.sim_threshold is not None and self.sim_threshold > len(self.schema):
                raise ConfigError("sim_threshold cannot exceed the number of attributes")

    @classmethod
    def exact(cls, max_records: int, **kwargs) -> "ClustererConfig":
        """Configuration that never prunes streams of up to ``max_records`` (Squeezer)."""
        p = LossyParams.exact(max_records)
        return cls(epsilon=p.epsilon, support=p.support, **kwargs)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "support": self.support,
            "sim_threshold": self.sim_threshold,
            "max_clusters": self.max_clusters,
            "bin_width": self.bin_width,
            "missing_policy": self.missing_policy.value,
            "balance_beta": self.balance_beta,
            "schema": None if self.schema is None else [k.value for k in self.schema],
        }


@dataclass
class AssignmentOutcome:
    record_index: int
    cluster_index: int
    created_new: bool
    best_similarity: float
    error: Optional[str] = None


@dataclass
class ClusterModel:
    config: Optional[ClustererConfig]
    clusters: List[ClusterHistogram] = field(default_factory=list)
    total_seen: int = 0
    rejected: int = 0
    bin_origins: Dict[int, float] = field(default_factory=dict)
    m: Optional[int] = None
    live_entries: int = 0  # running total, kept in step with insertions and pruning
    # per attribute: value -> {cluster index: entry}; shares entry objects with the histograms
    _index: List[Dict[Hashable, Dict[int, LossyEntry]]] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.m is None and self.config is not None and self.config.schema is not None:
            self.m = len(self.config.schema)
        if self.m is not None and not self._index:
            self._index = [{} for _ in range(self.m)]

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def sim_threshold(self) -> float:
        st = self.config.sim_threshold
        return self.m / 2 if st is None else st

    @property
    def prunings(self) -> int:
        return sum(c.prune_count for c in self.clusters)

    def entry_count(self) -> int:
        return sum(entry_count(c) for c in self.clusters)

    def _bind_arity(self, m: int):
        self.m = m
        self._index = [{} for _ in range(m)]
        st = self.config.sim_threshold if self.config else None
        if st is not None and st > m:
            raise ConfigError("sim_threshold cannot exceed the number of attributes")


def preprocess(record: Sequence, model: ClusterModel) -> tuple:
    """Bin numeric cells and apply the missing-value policy.

    A numeric attribute's first observed value becomes its bin origin; bins
    are ``floor((v - origin) / bin_width)`` and may be negative.
    """
    config = model.config
    schema = config.schema
    if schema is not None and len(record) != len(schema):
        raise ValueError(f"arity mismatch: expected {len(schema)} cells, got {len(record)}")
    as_value = config.missing_policy is MissingPolicy.AS_VALUE
    out = []
    for j, cell in enumerate(record):
        if cell is MISSING:
            out.append(MISSING_TOKEN if as_value else MISSING)
        elif schema is not None and schema[j] is AttrKind.NUMERIC:
            if config.bin_width is None:
                raise ConfigError("numeric cell but no bin_width configured")
            v = float(cell)
            origin = model.bin_origins.setdefault(j, v)
            out.append(f"bin:{math.floor((v - origin) / config.bin_width)}")
        else:
            out.append(cell)
    return tuple(out)


def resolve_missing(record: Sequence, policy=MissingPolicy.AS_VALUE) -> tuple:
    """Apply the missing-value policy to an all-categorical record."""
    if MissingPolicy(policy) is MissingPolicy.AS_VALUE:
        return tuple(MISSING_TOKEN if v is MISSING else v for v in record)
    return tuple(record)


def selection_score(sim: float, cluster_size: int, model: ClusterModel) -> float:
    """Similarity weighted towards small clusters: ``sim * (N / (k N_i))**beta``."""
    beta = model.config.balance_beta
    if beta == 0:
        return sim
    return sim * (model.total_seen / (model.k * cluster_size)) ** beta


def best_index(scores: Sequence[float]) -> int:
    """Position of the highest score; the earliest one wins ties."""
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def similarities(model: ClusterModel, record: Record) -> List[float]:
    """Similarity of ``record`` to every cluster, in cluster order."""
    params = model.config.params
    clusters = model.clusters
    thresholds = [params.threshold(c.size) for c in clusters]
    mass = [0] * len(clusters)
    for j, v in enumerate(record):
        if v is MISSING:
            continue
        holders = model._index[j].get(v)
        if holders:
            for ci, entry in holders.items():
                f = entry.f
                if f >= thresholds[ci]:
                    mass[ci] += f
    return [mass[i] / c.size for i, c in enumerate(clusters)]


def _absorb(model: ClusterModel, ci: int, record: Record):
    params = model.config.params
    hist = model.clusters[ci]
    hist.size += 1
    model.total_seen += 1
    bucket = params.current_bucket(hist.size)
    index = model._index
    for j, v in enumerate(record):
        if v is MISSING:
            continue
        holders = index[j].get(v)
        entry = holders.get(ci) if holders else None
        if entry is None:
            entry = LossyEntry(v, 1, bucket - 1)
            hist.attribute_histograms[j][v] = entry
            model.live_entries += 1
            if holders is None:
                index[j][v] = {ci: entry}
            else:
                holders[ci] = entry
        else:
            entry.f += 1
    if hist.size % params.bucket_width == 0:

        def unindex(j, entry):
            holders = index[j][entry.value]
            del holders[ci]
            model.live_entries -= 1
            if not holders:
                del index[j][entry.value]

        prune(hist, params, on_remove=unindex)


def process_record(model: ClusterModel, record: Record) -> AssignmentOutcome:
    """Assign one preprocessed record, mutating ``model`` in place."""
    record_index = model.total_seen + model.rejected
    if model.m is None:
        model._bind_arity(len(record))
    if len(record) != model.m:
        model.rejected += 1
        return AssignmentOutcome(record_index, -1, False, float("nan"),
                                 error=f"arity mismatch: expected {model.m} cells, got {len(record)}")

    if not model.clusters:
        model.clusters.append(ClusterHistogram.empty(model.m))
        _absorb(model, 0, record)
        return AssignmentOutcome(record_index, 0, True, 0.0)

    sims = similarities(model, record)
    if model.config.balance_beta == 0:
        best = best_index(sims)
    else:
        best = best_index([selection_score(s, c.size, model) for s, c in zip(sims, model.clusters)])
    best_sim = sims[best]

    mc = model.config.max_clusters
    if best_sim > model.sim_threshold or (mc is not None and model.k >= mc):
        _absorb(model, best, record)
        return AssignmentOutcome(record_index, best, False, best_sim)
    model.clusters.append(ClusterHistogram.empty(model.m))
    new = model.k - 1
    _absorb(model, new, record)
    return AssignmentOutcome(record_index, new, True, best_sim)


def reject(model: ClusterModel, message: str) -> AssignmentOutcome:
    """Record an input row that never reached the clusterer."""
    outcome = AssignmentOutcome(model.total_seen + model.rejected, -1, False,
                                float("nan"), error=message)
    model.rejected += 1
    return outcome


def feed(model: ClusterModel, raw: Sequence) -> AssignmentOutcome:
    """Preprocess and process one raw record; bad records become error outcomes."""
    try:
        record = preprocess(raw, model)
    except ConfigError:
        raise
    except ValueError as exc:
        return reject(model, str(exc))
    return process_record(model, record)


def run_stream(config: ClustererConfig, records: Iterable[Sequence]
               ) -> Tuple[ClusterModel, List[AssignmentOutcome]]:
    """Cluster ``records`` in a single pass."""
    model = ClusterModel(config)
    outcomes = [feed(model, raw) for raw in records]
    return model, outcomes


@dataclass(frozen=True)
class ClusterSnapshot:
    size: int
    prune_count: int
    attributes: Tuple[Tuple[Tuple[Hashable, int, int], ...], ...]

    def entry_count(self) -> int:
        return sum(len(a) for a in self.attributes)


@dataclass(frozen=True)
class ModelSnapshot:
    total_seen: int
    clusters: Tuple[ClusterSnapshot, ...]
    config: Optional[dict] = None

    @property
    def k(self) -> int:
        return len(self.clusters)

    def entry_count(self) -> int:
        return sum(c.entry_count() for c in self.clusters)

    def to_dict(self) -> dict:
        return {
            "total_seen": self.total_seen,
            "config": self.config,
            "clusters": [
                {
                    "size": c.size,
                    "prune_count": c.prune_count,
                    "attributes": [[list(t) for t in attr] for attr in c.attributes],
                }
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSnapshot":
        clusters = tuple(
            ClusterSnapshot(
                c["size"], c.get("prune_count", 0),
                tuple(tuple((v, f, dl) for v, f, dl in attr) for attr in c["attributes"]),
            )
            for c in d["clusters"]
        )
        return cls(d["total_seen"], clusters, d.get("config"))


def _sorted_triples(attr_hist) -> Tuple[Tuple[Hashable, int, int], ...]:
    return tuple(sorted((e.as_triple() for e in attr_hist.values()), key=lambda t: str(t[0])))


def snapshot(model: ClusterModel) -> ModelSnapshot:
    clusters = tuple(
        ClusterSnapshot(c.size, c.prune_count,
                        tuple(_sorted_triples(h) for h in c.attribute_histograms))
        for c in model.clusters
    )
    config = model.config.to_dict() if model.config is not None else None
    return ModelSnapshot(model.total_seen, clusters, config)
