"""Reading and writing prediction logs together with model metadata.

Formats:

* predictions CSV, header ``model_id,time_step,mood`` (``time_step`` 1-based)
* metadata CSV, header ``model_id,method,interval_length,overall_accuracy``
  followed by k*k ``cm_<true>_<pred>`` columns in canonical mood order
* moods CSV, header ``label,color`` (optional; default palette otherwise)
* bundle JSON with keys ``moods``, ``models`` and ``predictions``

Line numbers in errors are 1-based with the header on line 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import DEFAULT_MOODS, Bundle, ModelMeta, MoodSet, PredictionMatrix, default_color
from .errors import (
    BadAccuracyRange,
    BadRange,
    DuplicateCell,
    FluxRiverError,
    MalformedRow,
    MissingCell,
    NegativeCount,
    UnknownModel,
    UnknownMood,
    WrongColumnCount,
)

PREDICTION_HEADER = ["model_id", "time_step", "mood"]
META_FIXED = ["model_id", "method", "interval_length", "overall_accuracy"]
MOODS_HEADER = ["label", "color"]


def _rows(text: str) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or row == [""]:
            continue
        yield reader.line_num, row


def parse_predictions(
    text: str,
    mood_set: MoodSet = DEFAULT_MOODS,
    models: Sequence[str] | None = None,
) -> PredictionMatrix:
    """Parse a predictions CSV into a complete matrix.

    Rows may come in any order.  Row order of the result is ``models`` when
    given (unlisted models are an error), otherwise the sorted model ids, so
    permuting input rows never changes the result.
    """
    rows = _rows(text)
    first = next(rows, None)
    if first is None or first[1] != PREDICTION_HEADER:
        raise MalformedRow(f"header must be {','.join(PREDICTION_HEADER)}", 1, None if first is None else first[1])
    labels = {m.label: m.id for m in mood_set}
    cells: dict[tuple[str, int], int] = {}
    for line, row in rows:
        if len(row) != 3:
            raise MalformedRow(f"expected 3 fields, got {len(row)}", line, row)
        model_id, step_text, label = row
        if not model_id:
            raise MalformedRow("empty model_id", line, row)
        try:
            step = int(step_text)
        except ValueError:
            raise MalformedRow(f"time_step {step_text!r} is not an integer", line, step_text) from None
        if step < 1:
            raise MalformedRow(f"time_step {step} must be >= 1", line, step_text)
        if label not in labels:
            raise UnknownMood(f"mood {label!r} not in {list(labels)}", line, label)
        if models is not None and model_id not in models:
            raise UnknownModel(f"model {model_id!r} has no metadata", line, model_id)
        key = (model_id, step)
        if key in cells:
            raise DuplicateCell(f"second prediction for model {model_id!r} at step {step}", line, model_id)
        cells[key] = labels[label]
    if not cells:
        raise MissingCell("log contains no predictions")
    order = list(models) if models is not None else sorted({mid for mid, _ in cells})
    n = max(step for _, step in cells)
    grid = np.empty((len(order), n), dtype=np.int64)
    for i, mid in enumerate(order):
        for t in range(1, n + 1):
            try:
                grid[i, t - 1] = cells[(mid, t)]
            except KeyError:
                raise MissingCell(f"no prediction for model {mid!r} at step {t}", None, (mid, t)) from None
    return PredictionMatrix(tuple(order), grid, mood_set)


def _confusion_labels(columns: Sequence[str], line: int) -> list[str]:
    """Recover mood labels from ``cm_<true>_<pred>`` column names."""
    k = math.isqrt(len(columns))
    if k < 2 or k * k != len(columns):
        raise WrongColumnCount(f"{len(columns)} confusion columns is not k*k for k >= 2", line, len(columns))
    first = columns[0]
    if not first.startswith("cm_"):
        raise MalformedRow(f"confusion column {first!r} must start with cm_", line, first)
    body = first[3:]
    l0 = None
    for i, ch in enumerate(body):
        if ch == "_" and body[:i] == body[i + 1 :] and body[:i]:
            l0 = body[:i]
            break
    if l0 is None:
        raise MalformedRow(f"cannot read mood label from {first!r}", line, first)
    prefix = f"cm_{l0}_"
    labels = []
    for col in columns[:k]:
        if not col.startswith(prefix):
            raise MalformedRow(f"confusion column {col!r} out of order", line, col)
        labels.append(col[len(prefix) :])
    expected = [f"cm_{a}_{b}" for a in labels for b in labels]
    if list(columns) != expected:
        bad = next(c for c, e in zip(columns, expected) if c != e)
        raise MalformedRow(f"confusion column {bad!r} out of canonical order", line, bad)
    return labels


def meta_mood_labels(text: str) -> list[str]:
    """Mood labels implied by a metadata CSV header."""
    first = next(_rows(text), None)
    if first is None or first[1][:4] != META_FIXED:
        raise MalformedRow(f"header must start with {','.join(META_FIXED)}", 1)
    return _confusion_labels(first[1][4:], 1)


def parse_model_meta(text: str, mood_set: MoodSet | None = None) -> list[ModelMeta]:
    """Parse a metadata CSV; confusion rows are true class, columns predicted."""
    rows = _rows(text)
    first = next(rows, None)
    if first is None or first[1][:4] != META_FIXED:
        raise MalformedRow(f"header must start with {','.join(META_FIXED)}", 1)
    header = first[1]
    labels = _confusion_labels(header[4:], 1)
    if mood_set is not None and list(mood_set.labels) != labels:
        raise WrongColumnCount(f"confusion columns name moods {labels}, expected {list(mood_set.labels)}", 1, labels)
    k = len(labels)
    out = []
    seen: set[str] = set()
    for line, row in rows:
        if len(row) != len(header):
            raise WrongColumnCount(f"expected {len(header)} fields, got {len(row)}", line, len(row))
        model_id, method, interval_text, acc_text = row[:4]
        if not model_id:
            raise MalformedRow("empty model_id", line, row)
        if model_id in seen:
            raise DuplicateCell(f"model {model_id!r} listed twice", line, model_id)
        seen.add(model_id)
        try:
            interval = int(interval_text)
        except ValueError:
            raise MalformedRow(f"interval_length {interval_text!r} is not an integer", line, interval_text) from None
        if interval < 1:
            raise BadRange(f"interval_length {interval} must be >= 1", line, interval_text)
        try:
            acc = float(acc_text)
        except ValueError:
            raise MalformedRow(f"overall_accuracy {acc_text!r} is not a number", line, acc_text) from None
        if not 0.0 <= acc <= 1.0:
            raise BadAccuracyRange(f"overall_accuracy {acc} outside [0, 1]", line, acc_text)
        counts = []
        for col, cell in zip(header[4:], row[4:]):
            try:
                v = int(cell)
            except ValueError:
                raise MalformedRow(f"{col} value {cell!r} is not an integer", line, cell) from None
            if v < 0:
                raise NegativeCount(f"{col} is negative ({v})", line, cell)
            counts.append(v)
        confusion = tuple(tuple(counts[r * k : (r + 1) * k]) for r in range(k))
        out.append(ModelMeta(model_id, method, interval, acc, confusion))
    return out


def parse_moods(text: str) -> MoodSet:
    rows = _rows(text)
    first = next(rows, None)
    if first is None or first[1] != MOODS_HEADER:
        raise MalformedRow(f"header must be {','.join(MOODS_HEADER)}", 1)
    labels, colors = [], []
    for line, row in rows:
        if len(row) != 2:
            raise MalformedRow(f"expected 2 fields, got {len(row)}", line, row)
        labels.append(row[0])
        colors.append(row[1] or default_color(row[0], len(labels) - 1))
    try:
        return MoodSet.from_labels(labels, colors)
    except FluxRiverError as exc:
        raise MalformedRow(str(exc)) from None


@dataclass(frozen=True)
class BundleDocuments:
    predictions: str
    meta: str
    moods: str

    def write(self, directory: str | Path, stem: str = "") -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {}
        for name in ("predictions", "meta", "moods"):
            path = directory / f"{stem}{name}.csv"
            path.write_text(getattr(self, name), encoding="utf-8", newline="\n")
            paths[name] = path
        return paths


def _csv_text(rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def serialize_bundle(b: Bundle) -> BundleDocuments:
    """CSV documents for a bundle; rows follow the matrix model order, then step."""
    labels = b.mood_set.labels
    pm = b.predictions
    pred_rows: list[Sequence[object]] = [PREDICTION_HEADER]
    for i, mid in enumerate(pm.models):
        for t, c in enumerate(pm.cells[i], start=1):
            pred_rows.append((mid, t, labels[c]))
    meta_rows: list[Sequence[object]] = [META_FIXED + [f"cm_{a}_{p}" for a in labels for p in labels]]
    for mm in b.ordered_meta():
        flat = [v for row in mm.confusion for v in row]
        meta_rows.append([mm.model_id, mm.method, mm.interval_length, repr(float(mm.overall_accuracy)), *flat])
    mood_rows = [MOODS_HEADER] + [[m.label, m.color] for m in b.mood_set]
    return BundleDocuments(_csv_text(pred_rows), _csv_text(meta_rows), _csv_text(mood_rows))


def parse_bundle(predictions: str, meta: str, moods: str | None = None) -> Bundle:
    """Parse the CSV trio back into a bundle.

    Without a moods document the mood labels come from the metadata header and
    colours from the default palette.
    """
    mood_set = parse_moods(moods) if moods is not None else MoodSet.from_labels(meta_mood_labels(meta))
    meta_list = parse_model_meta(meta, mood_set)
    pm = parse_predictions(predictions, mood_set, models=[m.model_id for m in meta_list])
    return Bundle(mood_set, tuple(meta_list), pm)


def bundle_to_json(b: Bundle) -> str:
    labels = b.mood_set.labels
    pm = b.predictions
    doc = {
        "moods": [{"label": m.label, "color": m.color} for m in b.mood_set],
        "models": [
            {
                "model_id": mm.model_id,
                "method": mm.method,
                "interval_length": mm.interval_length,
                "overall_accuracy": mm.overall_accuracy,
                "confusion": [list(row) for row in mm.confusion],
            }
            for mm in b.ordered_meta()
        ],
        "predictions": [
            [mid, t, labels[c]] for i, mid in enumerate(pm.models) for t, c in enumerate(pm.cells[i].tolist(), 1)
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def bundle_from_json(text: str) -> Bundle:
    try:
        doc = json.loads(text)
        moods = MoodSet.from_labels(
            [m["label"] for m in doc["moods"]],
            [m.get("color") or default_color(m["label"], i) for i, m in enumerate(doc["moods"])],
        )
        meta = []
        for entry in doc["models"]:
            if not 0.0 <= float(entry["overall_accuracy"]) <= 1.0:
                raise BadAccuracyRange(f"{entry['model_id']}: overall_accuracy outside [0, 1]")
            if int(entry["interval_length"]) < 1:
                raise BadRange(f"{entry['model_id']}: interval_length must be >= 1")
            meta.append(
                ModelMeta(
                    entry["model_id"],
                    entry["method"],
                    int(entry["interval_length"]),
                    float(entry["overall_accuracy"]),
                    tuple(tuple(row) for row in entry["confusion"]),
                )
            )
        rows = [PREDICTION_HEADER] + [list(r) for r in doc["predictions"]]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise MalformedRow(f"bad bundle JSON: {exc}") from None
    pm = parse_predictions(_csv_text(rows), moods, models=[m.model_id for m in meta])
    return Bundle(moods, tuple(meta), pm)


def load_bundle(
    predictions: str | Path | None = None,
    meta: str | Path | None = None,
    bundle: str | Path | None = None,
    moods: str | Path | None = None,
) -> Bundle:
    """Load either a bundle JSON or a predictions + metadata CSV pair."""
    if bundle is not None:
        return bundle_from_json(Path(bundle).read_text(encoding="utf-8"))
    if predictions is None or meta is None:
        raise FluxRiverError("need --bundle, or both --predictions and --meta")
    moods_text = Path(moods).read_text(encoding="utf-8") if moods is not None else None
    return parse_bundle(
        Path(predictions).read_text(encoding="utf-8"),
        Path(meta).read_text(encoding="utf-8"),
        moods_text,
    )


__all__ = [
    "Bundle",
    "BundleDocuments",
    "bundle_from_json",
    "bundle_to_json",
    "load_bundle",
    "meta_mood_labels",
    "parse_bundle",
    "parse_model_meta",
    "parse_moods",
    "parse_predictions",
    "serialize_bundle",
]
