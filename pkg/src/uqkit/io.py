"""Artifact writing: CSV tables, JSON documents, checksums."""

import csv
import hashlib
import json
import math
import os

import numpy as np


def format_value(v):
    """Locale-independent text for one CSV cell.

    Floats use ``repr`` (shortest round-trip form), so identical numbers
    always print identically.
    """
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def expand_complex(columns):
    """Split complex-valued columns into ``<name>_re`` and ``<name>_im``.

    ``columns`` maps names to 1-D arrays (or lists); the order is kept.
    """
    out = {}
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            out[f"{name}_re"] = arr.real
            out[f"{name}_im"] = arr.imag
        else:
            out[name] = values
    return out


def write_csv(path, columns, sidecar=None):
    """Write a column-oriented table as RFC-4180 CSV with a header row.

    When ``sidecar`` is a dict, ``<stem>.json`` is written next to the table
    with the column names, the row count and the entries of ``sidecar``.
    Returns the SHA-256 hex digest of the CSV bytes.
    """
    columns = expand_complex(columns)
    names = list(columns)
    data = [list(np.asarray(columns[k]).tolist()) if isinstance(columns[k], np.ndarray) else list(columns[k]) for k in names]
    n = len(data[0]) if data else 0
    if any(len(c) != n for c in data):
        raise ValueError("all columns must have the same length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(names)
        for i in range(n):
            writer.writerow([format_value(c[i]) for c in data])
    if sidecar is not None:
        write_json(sidecar_path(path), {**sidecar, "file": os.path.basename(path), "columns": names, "rows": n})
    return sha256_file(path)


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def rows_to_columns(rows, keys=None):
    """Convert a list of dict rows to an ordered column mapping."""
    if not rows:
        return {k: [] for k in (keys or [])}
    keys = keys or list(rows[0])
    return {k: [r[k] for r in rows] for k in keys}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
