"""Reshape reports, bench tables and traces into long ``series,x,y`` CSV."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

HEADER = ("series", "x", "y")


def to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(HEADER)
    for series, x, y in rows:
        writer.writerow([series, _fmt(x), _fmt(y)])
    return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def rate_study_rows(doc: dict):
    for entry in doc.get("studies", []):
        lam = entry["lambda"]
        yield "bias", lam, entry["fixed_point_bias"]
        if entry.get("fitted_rho") is not None:
            yield "fitted_rho", lam, entry["fitted_rho"]
        if entry.get("theoretical_rho") is not None:
            yield "theoretical_rho", lam, entry["theoretical_rho"]


def report_rows(doc: dict):
    for item in doc.get("attributions", []):
        yield doc.get("estimator", "estimate"), item["feature"], item["value"]


def bench_rows(table_rows):
    for row in table_rows:
        yield row["method"], int(row["budget"]), float(row["mean_bias"])


def trace_rows(trace_rows_, series: str, reference=None):
    """Error against ``reference`` per iteration, or the stopping statistic without one."""
    for row in trace_rows_:
        n = int(row["n"])
        if reference is not None:
            beta = np.array([float(row[f"beta_{i}"]) for i in range(len(reference))])
            yield series, n, float(np.linalg.norm(beta - reference))
        elif row.get("max_sigma"):
            yield series, n, float(row["max_sigma"])


def emit_plot_data(path, series: str | None = None, reference=None) -> str:
    """Dispatch on file content: JSON report or rate study, bench CSV, trace CSV or long CSV."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        doc = json.loads(text)
        if "studies" in doc:
            return to_csv(rate_study_rows(doc))
        return to_csv(report_rows(doc))
    rows = list(csv.DictReader(io.StringIO(text)))
    if text.startswith("series,"):
        # already long format (rate-study traces)
        return to_csv((r["series"], r["x"], r["y"]) for r in rows)
    if text.startswith("method,"):
        return to_csv(bench_rows(rows))
    return to_csv(trace_rows(rows, series or "trace", reference))
