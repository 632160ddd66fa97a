"""CSV stream ingestion and the assignment/summary/model output formats."""
from __future__ import annotations

import csv
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from .clusterer import AssignmentOutcome, AttrKind, ModelSnapshot
from .evaluation import EvalReport
from .similarity import MISSING

MODEL_FORMAT = "streamclucd-model"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class StreamSchema:
    """Column layout of an input CSV.  ``names``/``kinds`` cover the attribute columns only."""

    names: Tuple[str, ...]
    kinds: Tuple[AttrKind, ...]
    missing_token: str = "?"
    label_column: Optional[str] = None

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("attribute names must be unique")
        if len(self.kinds) != len(self.names):
            raise ValueError("one kind per attribute is required")
        if self.label_column is not None and self.label_column in self.names:
            raise ValueError("label column cannot also be an attribute")

    @property
    def m(self) -> int:
        return len(self.names)

    @classmethod
    def from_header(cls, header: Sequence[str], label_column: Optional[str] = None,
                    numeric: Sequence[str] = (), missing_token: str = "?") -> "StreamSchema":
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise ValueError(f"label column {label_column!r} not found in header")
        unknown = set(numeric) - set(header)
        if unknown:
            raise ValueError(f"numeric columns not in header: {sorted(unknown)}")
        names = tuple(h for h in header if h != label_column)
        kinds = tuple(AttrKind.NUMERIC if h in numeric else AttrKind.CATEGORICAL for h in names)
        return cls(names, kinds, missing_token, label_column)


def load_schema_file(path) -> dict:
    """Schema JSON: ``{"numeric": [...], "missing_token": "?", "label_column": "class"}``."""
    spec = json.loads(Path(path).read_text())
    allowed = {"numeric", "missing_token", "label_column", "columns"}
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown schema keys: {sorted(extra)}")
    return spec


class Row(NamedTuple):
    line: int  # 1-based data line number
    record: tuple
    label: Optional[str]
    error: Optional[str] = None


@contextmanager
def _open_source(source) -> Iterator[IO[str]]:
    if source in ("-", None):
        yield sys.stdin
    elif hasattr(source, "read"):
        yield source
    else:
        with open(source, newline="") as fh:
            yield fh


class RecordStream:
    """Single-use iterator over the rows of a CSV stream.

    The header is read on construction, so ``schema`` is available before
    iteration starts.  Each data line is parsed and yielded once.
    """

    def __init__(self, source, label_column: Optional[str] = None, numeric: Sequence[str] = (),
                 missing_token: str = "?", columns: Optional[Sequence[str]] = None):
        self._done = False
        self.lines_read = 0
        self._ctx = _open_source(source)
        fh = self._ctx.__enter__()
        try:
            self._reader = csv.reader(fh)
            header = next(self._reader, None)
            if header is None or not any(h.strip() for h in header):
                raise ValueError("input has no header line")
            self.header = [h.strip() for h in header]
            if columns is not None and self.header != list(columns):
                raise ValueError("header does not match the schema's column list")
            self.schema = StreamSchema.from_header(self.header, label_column, numeric, missing_token)
        except Exception:
            self.close()
            raise
        self._label_pos = self.header.index(label_column) if label_column else None
        self._numeric = [k is AttrKind.NUMERIC for k in self.schema.kinds]

    def __iter__(self):
        return self

    def __next__(self) -> Row:
        if self._done:
            raise StopIteration
        cells = next(self._reader, None)
        while cells is not None and not cells:
            cells = next(self._reader, None)  # skip blank lines
        if cells is None:
            self.close()
            raise StopIteration
        self.lines_read += 1
        return self._parse(cells)

    def _parse(self, cells: List[str]) -> Row:
        n = self.lines_read
        if len(cells) != len(self.header):
            return Row(n, tuple(cells), None,
                       f"line {n}: expected {len(self.header)} cells, got {len(cells)}")
        label = None
        if self._label_pos is not None:
            label = cells[self._label_pos].strip()
            cells = cells[: self._label_pos] + cells[self._label_pos + 1:]
        miss = self.schema.missing_token
        out = []
        for cell, numeric in zip(cells, self._numeric):
            cell = cell.strip()
            if cell == miss:
                out.append(MISSING)
            elif numeric:
                try:
                    out.append(float(cell))
                except ValueError:
                    return Row(n, tuple(cells), label, f"line {n}: {cell!r} is not numeric")
            else:
                out.append(cell)
        return Row(n, tuple(out), label)

    def close(self):
        if not self._done:
            self._done = True
            self._ctx.__exit__(None, None, None)


def read_stream(source, schema: Optional[dict] = None, label_column: Optional[str] = None
                ) -> RecordStream:
    schema = dict(schema or {})
    if label_column is not None:
        schema["label_column"] = label_column
    return RecordStream(source, schema.get("label_column"), schema.get("numeric", ()),
                        schema.get("missing_token", "?"), schema.get("columns"))


def read_labelled(source, label_column: str, **kw) -> Tuple[List[tuple], List[str]]:
    """Materialise a labelled CSV; malformed rows raise."""
    records, labels = [], []
    for row in read_stream(source, label_column=label_column, **kw):
        if row.error:
            raise ValueError(row.error)
        records.append(row.record)
        labels.append(row.label)
    return records, labels


def _fmt_float(x: float) -> str:
    # repr is the shortest string that round-trips exactly
    return "" if x != x else repr(float(x))


ASSIGNMENT_COLUMNS = ["record_index", "cluster_index", "created_new", "best_similarity"]


class AssignmentWriter:
    """Appends one assignment row per processed record."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(ASSIGNMENT_COLUMNS)

    def write(self, o: AssignmentOutcome):
        self._w.writerow([o.record_index, o.cluster_index, int(o.created_new),
                          _fmt_float(o.best_similarity)])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_assignments(outcomes: Sequence[AssignmentOutcome], path) -> None:
    with AssignmentWriter(path) as w:
        for o in outcomes:
            w.write(o)


def read_assignments(path) -> List[int]:
    with open(path, newline="") as fh:
        return [int(r["cluster_index"]) for r in csv.DictReader(fh)]


def summary_dict(config: Optional[dict], k: int, n: int, total_entries: int, prunings: int,
                 elapsed: float, report: Optional[EvalReport] = None, **extra) -> dict:
    out = {
        "config": config,
        "k": k,
        "N": n,
        "total_entries": total_entries,
        "prunings": prunings,
        "elapsed_ms": elapsed * 1000.0,
    }
    if report is not None:
        out.update(accuracy=report.accuracy, error=report.error,
                   absolute_error=report.absolute_error)
    out.update(extra)
    return out


def _no_nan(obj):
    if isinstance(obj, float) and obj != obj:
        return None
    if isinstance(obj, dict):
        return {k: _no_nan(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_no_nan(v) for v in obj]
    return obj


def write_json(obj, path) -> None:
    text = json.dumps(_no_nan(obj), indent=2, allow_nan=False) + "\n"
    if path in ("-", None):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_model_dump(snap: ModelSnapshot, path) -> None:
    body = {"format": MODEL_FORMAT, "version": MODEL_FORMAT_VERSION, **snap.to_dict()}
    Path(path).write_text(json.dumps(body, allow_nan=False) + "\n")


def load_model_dump(path) -> ModelSnapshot:
    body = json.loads(Path(path).read_text())
    if body.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path} is not a {MODEL_FORMAT} dump")
    return ModelSnapshot.from_dict(body)


def write_outputs(snap: ModelSnapshot, outcomes: Sequence[AssignmentOutcome], summary: dict,
                  assignments_path=None, summary_path=None, model_path=None) -> None:
    """Write whichever of the three outputs were requested."""
    if assignments_path:
        write_assignments(outcomes, assignments_path)
    if summary_path:
        write_json(summary, summary_path)
    if model_path:
        write_model_dump(snap, model_path)


def write_table(rows: Sequence[dict], path: Union[str, Path]) -> None:
    """Sweep results as CSV or JSON, chosen by file extension."""
    path = str(path)
    if path.endswith(".json"):
        write_json(list(rows), path)
        return
    keys: List[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (_fmt_float(v) if isinstance(v, float) else v) for k, v in r.items()})
