"""Seeded synthetic categorical streams with planted, well-separated classes.

Every class owns one dominant token per attribute (distinct across classes).
A record of class ``c`` shows that token with probability ``purity`` and a
uniformly drawn other token from the attribute's domain otherwise, so
``purity`` is exactly the dominant token's probability.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class GenSpec:
    rows: int
    attrs: int
    classes: int
    domain_size: Optional[int] = None  # None: twice the class count
    purity: float = 0.9
    seed: int = 0

    def __post_init__(self):
        for name in ("rows", "attrs", "classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.domain_size is None:
            object.__setattr__(self, "domain_size", 2 * self.classes)
        if self.classes > self.domain_size:
            raise ValueError("classes cannot exceed domain_size")
        if not 0.0 < self.purity <= 1.0:
            raise ValueError("purity must lie in (0, 1]")


def generate_codes(spec: GenSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integer form: ``(X, labels, dominant)`` with ``dominant[c, j]`` the planted code."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    dominant = np.stack(
        [rng.permutation(spec.domain_size)[: spec.classes] for _ in range(spec.attrs)], axis=1
    )
    # balanced class sizes, shuffled into arrival order
    labels = rng.permutation(np.arange(spec.rows) % spec.classes)
    keep = rng.random((spec.rows, spec.attrs)) < spec.purity
    planted = dominant[labels]
    if spec.domain_size > 1:
        noise = rng.integers(0, spec.domain_size - 1, size=(spec.rows, spec.attrs))
        noise += noise >= planted  # skip over the planted token
    else:
        noise = planted
    X = np.where(keep, planted, noise)
    return X, labels, dominant


def generate(spec: GenSpec) -> Tuple[List[tuple], List[int]]:
    X, labels, _ = generate_codes(spec)
    tokens = [f"v{i}" for i in range(spec.domain_size)]
    records = [tuple(tokens[c] for c in row) for row in X.tolist()]
    return records, labels.tolist()


def metadata(spec: GenSpec) -> dict:
    return {"rng": RNG_ALGORITHM, "numpy": np.__version__, **asdict(spec)}


def write_csv(spec: GenSpec, path, label_column: str = "class") -> Path:
    """Write the stream as CSV (trailing label column) plus a ``.meta.json`` sidecar."""
    path = Path(path)
    records, labels = generate(spec)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"a{j}" for j in range(spec.attrs)] + [label_column])
        for rec, y in zip(records, labels):
            w.writerow([*rec, y])
    meta = path.with_name(path.name + ".meta.json")
    meta.write_text(json.dumps(metadata(spec), indent=2, sort_keys=True) + "\n")
    return path


# Benchmark streams 1..4: 100k rows, attrs == classes == 10 * stream
def benchmark_spec(stream: int, rows: int = 100_000, seed: int = 5, **kw) -> GenSpec:
    size = 10 * stream
    return GenSpec(rows=rows, attrs=size, classes=size, seed=seed, **kw)
