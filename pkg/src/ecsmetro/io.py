"""CSV / JSON serialization for sweeps, sample records and Wigner grids.

CSV files start with ``#``-prefixed metadata lines (``# key: <json>``), then a
header row. Floats are written with 17 significant digits so they round-trip
exactly. A divergent precision is written as ``inf`` in CSV and as
``{"special": "inf"}`` in JSON.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from typing import IO, Iterable

import numpy as np

from .measure import CountRecord, HomodyneRecord
from .states import WignerGrid

__all__ = [
    "REPORT_COLUMNS",
    "fmt",
    "parse_float",
    "json_value",
    "from_json_value",
    "write_reports_csv",
    "reports_to_json",
    "read_reports_csv",
    "write_samples_csv",
    "write_samples_jsonl",
    "read_samples",
    "write_wigner_csv",
    "wigner_to_json",
    "read_meta",
]

REPORT_COLUMNS = ("scheme", "phi_or_nbar", "cfi", "qfi", "delta_phi", "delta_phi_min", "delta_phi_sql")
TIMESTAMP_KEYS = ("created",)


def fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_float(text: str) -> float:
    return float(text)


def json_value(x):
    """Float for JSON, tagging infinities so they survive strict parsers."""
    x = float(x)
    if math.isinf(x):
        return {"special": "inf" if x > 0 else "-inf"}
    if math.isnan(x):
        return {"special": "nan"}
    return x


def from_json_value(v) -> float:
    if isinstance(v, dict):
        return float(v["special"])
    return float(v)


def _write_meta(fh: IO[str], meta: dict | None) -> None:
    for key, val in (meta or {}).items():
        fh.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")


def read_meta(fh: IO[str]) -> dict:
    """Collect ``# key: value`` lines from the head of a CSV stream."""
    meta = {}
    for line in fh:
        if not line.startswith("#"):
            break
        key, _, val = line[1:].partition(":")
        meta[key.strip()] = json.loads(val)
    return meta


def _report_row(r, axis: str) -> list[str]:
    x = r.phi if axis == "phi" else r.n_bar
    return [r.scheme] + [fmt(v) for v in (x, r.cfi, r.qfi, r.delta_phi, r.delta_phi_min, r.delta_phi_sql)]


def write_reports_csv(fh: IO[str], reports: Iterable, axis: str = "phi", meta: dict | None = None) -> None:
    _write_meta(fh, meta)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(_report_row(r, axis))


def reports_to_json(reports: Iterable, axis: str = "phi", meta: dict | None = None) -> dict:
    rows = []
    for r in reports:
        x = r.phi if axis == "phi" else r.n_bar
        rows.append({
            "scheme": r.scheme,
            "phi_or_nbar": json_value(x),
            "cfi": json_value(r.cfi),
            "qfi": json_value(r.qfi),
            "delta_phi": json_value(r.delta_phi),
            "delta_phi_min": json_value(r.delta_phi_min),
            "delta_phi_sql": json_value(r.delta_phi_sql),
        })
    return {"meta": meta or {}, "rows": rows}


def _data_lines(fh: IO[str]):
    return (line for line in fh if not line.startswith("#"))


def read_reports_csv(fh: IO[str]) -> list[dict]:
    out = []
    for row in csv.DictReader(_data_lines(fh)):
        out.append({k: (v if k == "scheme" else parse_float(v)) for k, v in row.items()})
    return out


def write_samples_csv(fh: IO[str], record, meta: dict | None = None) -> None:
    _write_meta(fh, meta)
    w = csv.writer(fh, lineterminator="\n")
    q = record.qubit_x
    if isinstance(record, HomodyneRecord):
        w.writerow(["x_plus", "x_minus"] + (["qubit_x"] if q is not None else []))
        for i in range(len(record)):
            row = [fmt(record.x_plus[i]), fmt(record.x_minus[i])]
            w.writerow(row + ([str(int(q[i]))] if q is not None else []))
    else:
        w.writerow(["m", "n"] + (["qubit_x"] if q is not None else []))
        for i in range(len(record)):
            row = [str(int(record.m[i])), str(int(record.n[i]))]
            w.writerow(row + ([str(int(q[i]))] if q is not None else []))


def write_samples_jsonl(fh: IO[str], record, meta: dict | None = None) -> None:
    """One JSON object per line; the first line carries ``{"meta": ...}``."""
    fh.write(json.dumps({"meta": meta or {}}, sort_keys=True) + "\n")
    q = record.qubit_x
    for i in range(len(record)):
        if isinstance(record, HomodyneRecord):
            obj = {"x_plus": float(record.x_plus[i]), "x_minus": float(record.x_minus[i])}
        else:
            obj = {"m": int(record.m[i]), "n": int(record.n[i])}
        if q is not None:
            obj["qubit_x"] = int(q[i])
        fh.write(json.dumps(obj) + "\n")


def read_samples(fh: IO[str]):
    """Read a sample file written by :func:`write_samples_csv` or :func:`write_samples_jsonl`."""
    text = fh.read()
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    if first.lstrip().startswith("{"):
        rows = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
        rows = [r for r in rows if "meta" not in r]
    else:
        rows = list(csv.DictReader(_data_lines(_io.StringIO(text))))
    if not rows:
        raise ValueError("sample file holds no samples")
    has_q = "qubit_x" in rows[0]
    qx = np.array([int(r["qubit_x"]) for r in rows]) if has_q else None
    if "x_plus" in rows[0]:
        return HomodyneRecord(
            np.array([float(r["x_plus"]) for r in rows]),
            np.array([float(r["x_minus"]) for r in rows]),
            qx,
        )
    return CountRecord(np.array([int(r["m"]) for r in rows]), np.array([int(r["n"]) for r in rows]), qx)


def write_wigner_csv(fh: IO[str], grid: WignerGrid, meta: dict | None = None) -> None:
    _write_meta(fh, meta)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "p", "W"])
    for i, x in enumerate(grid.x_axis):
        for j, p in enumerate(grid.p_axis):
            w.writerow([fmt(x), fmt(p), fmt(grid.values[i, j])])


def wigner_to_json(grid: WignerGrid, meta: dict | None = None) -> dict:
    """Dense form: ``rows[i][j] = W(x_axis[i], p_axis[j])``."""
    return {
        "meta": meta or {},
        "x_axis": [float(x) for x in grid.x_axis],
        "p_axis": [float(p) for p in grid.p_axis],
        "rows": [[float(v) for v in row] for row in grid.values],
    }
