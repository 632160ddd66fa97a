"""UCI Mushroom loading.

The full 8124-row file is not redistributed here.  Point ``STREAMCLUCD_MUSHROOM``
at a copy of ``agaricus-lepiota.data`` (raw UCI layout: class first, no header)
or at a headered CSV with a ``class`` column.  A 5644-row complete-cases
subset ships with the package for smoke runs.
"""
from __future__ import annotations

import csv
import os
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple

from .similarity import MISSING

MUSHROOM_ATTRIBUTES = (
    "cap-shape", "cap-surface", "cap-color", "bruises", "odor", "gill-attachment",
    "gill-spacing", "gill-size", "gill-color", "stalk-shape", "stalk-root",
    "stalk-surface-above-ring", "stalk-surface-below-ring", "stalk-color-above-ring",
    "stalk-color-below-ring", "veil-type", "veil-color", "ring-number", "ring-type",
    "spore-print-color", "population", "habitat",
)
ENV_VAR = "STREAMCLUCD_MUSHROOM"
FULL_ROWS = 8124


def load_mushroom(path) -> Tuple[List[tuple], List[str]]:
    """Records (``?`` as missing) and class labels, in file order."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path} is empty")
    m = len(MUSHROOM_ATTRIBUTES)
    if "class" in rows[0]:
        pos = rows[0].index("class")
        rows = rows[1:]
    else:
        pos = 0  # raw UCI layout
    records, labels = [], []
    for n, r in enumerate(rows, 1):
        if len(r) != m + 1:
            raise ValueError(f"{path}: row {n} has {len(r)} cells, expected {m + 1}")
        labels.append(r[pos].strip())
        cells = r[:pos] + r[pos + 1:]
        records.append(tuple(MISSING if c == "?" else c.strip() for c in cells))
    return records, labels


def find_full_mushroom() -> Optional[Path]:
    """Location of the full Mushroom file, or None if it is not available."""
    candidates = []
    if os.environ.get(ENV_VAR):
        candidates.append(Path(os.environ[ENV_VAR]))
    here = Path(__file__).resolve()
    for base in (Path.cwd(), *here.parents[:4]):
        candidates += [base / "data" / "agaricus-lepiota.data", base / "data" / "mushroom.csv"]
    for p in candidates:
        if p.is_file():
            return p
    return None


def load_complete_cases() -> Tuple[List[tuple], List[str]]:
    """The bundled subset: Mushroom rows with no missing cells (5644 rows)."""
    ref = resources.files(__package__) / "data" / "mushroom_complete_cases.csv"
    with resources.as_file(ref) as p:
        return load_mushroom(p)
