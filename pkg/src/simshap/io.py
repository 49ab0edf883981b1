"""Dataset ingestion and file formats: CSV data, tabulated games, JSON reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from simshap.coalitions import check_enumerable
from simshap.games import TabulatedGame

SCHEMA_VERSION = 1
TIMING_FIELDS = ("millis",)


class InputError(ValueError):
    """Malformed user input; the CLI maps it to exit code 2."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray | None
    columns: list[str]


def ingest_csv(path, label_col: str | None = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise InputError(f"{path}: no data rows")
    if label_col is not None and label_col not in header:
        raise InputError(f"{path}: label column {label_col!r} not found")
    data = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise InputError(
                f"{path}: line {line} has {len(row)} columns, header has {len(header)}"
            )
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: non-numeric cell at line {line}, column {header[j]!r}: {cell!r}"
                ) from None
            if math.isnan(value):
                raise InputError(f"{path}: NaN cell at line {line}, column {header[j]!r}")
            data[i, j] = value
    if label_col is None:
        return Dataset(data, None, header)
    k = header.index(label_col)
    features = [h for j, h in enumerate(header) if j != k]
    return Dataset(np.delete(data, k, axis=1), data[:, k], features)


def read_table_game(path) -> TabulatedGame:
    """Read ``<bitstring> <value>`` lines; bit 0 is the leftmost character."""
    values: dict[int, float] = {}
    d = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or set(parts[0]) - {"0", "1"}:
                raise InputError(f"{path}: line {lineno}: expected '<bitstring> <value>'")
            bits, text = parts
            if d is None:
                d = len(bits)
                try:
                    check_enumerable(d)
                except ValueError as exc:
                    raise InputError(f"{path}: {exc}") from None
            elif len(bits) != d:
                raise InputError(f"{path}: line {lineno}: bitstring length {len(bits)} != {d}")
            index = sum(1 << i for i, b in enumerate(bits) if b == "1")
            if index in values:
                raise InputError(f"{path}: line {lineno}: duplicate coalition {bits}")
            try:
                values[index] = float(text)
            except ValueError:
                raise InputError(f"{path}: line {lineno}: bad value {text!r}") from None
    if d is None:
        raise InputError(f"{path}: empty table")
    missing = [i for i in range(1 << d) if i not in values]
    if missing:
        bits = "".join("1" if (missing[0] >> i) & 1 else "0" for i in range(d))
        raise InputError(f"{path}: {len(missing)} coalitions missing, first is {bits}")
    return TabulatedGame(values, d)


def write_table_game(path, values, d: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(1 << d):
            bits = "".join("1" if (i >> k) & 1 else "0" for k in range(d))
            fh.write(f"{bits} {float(values[i])!r}\n")


def report_to_dict(report, columns=None, extra: dict | None = None) -> dict:
    d = report.beta.shape[0]
    columns = list(columns) if columns is not None else [f"x{i}" for i in range(d)]
    doc = {
        "schemaVersion": SCHEMA_VERSION,
        "estimator": report.estimator,
        "attributions": [
            {"feature": name, "value": float(v)} for name, v in zip(columns, report.beta)
        ],
        "boundary": {"v_empty": report.boundary.v_empty, "v_full": report.boundary.v_full},
        "config": None if report.config is None else report.config.to_dict(),
        "iterations": report.iterations,
        "evaluations": report.evaluations,
        "converged": report.converged,
        "max_sigma": _num(report.max_sigma),
        "range": _num(report.beta_range),
        "millis": report.millis,
    }
    diag = {k: v for k, v in report.diagnostics.items() if k != "mean_A"}
    if diag:
        doc["diagnostics"] = diag
    if extra:
        doc.update(extra)
    return doc


def _num(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def mask_timing(doc):
    """Copy of a report document with wall-clock fields removed, for comparisons."""
    if isinstance(doc, dict):
        return {k: mask_timing(v) for k, v in doc.items() if k not in TIMING_FIELDS}
    if isinstance(doc, list):
        return [mask_timing(v) for v in doc]
    return doc
