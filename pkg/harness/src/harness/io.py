"""Readers and writers for the estimator CLI's file formats.

Deliberately self-contained: the harness exchanges data with the
estimator through files and subprocesses only, never imports. Floats
are written with ``repr`` so values round-trip bit-exactly.
"""
import csv
import json

import numpy as np

from .errors import HarnessError

__all__ = [
    "write_predictions_csv",
    "read_predictions_csv",
    "write_labels_csv",
    "read_labels_csv",
    "write_json",
    "read_json",
    "read_eval_csv",
]


def _open(path, mode="r"):
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise HarnessError(f"{path}: {exc.strerror or exc}") from None


def write_predictions_csv(path, names, sample_ids, values):
    values = np.asarray(values, dtype=float)
    with _open(path, "w") as fh:
        fh.write("sample_id," + ",".join(names) + "\n")
        for j, sid in enumerate(sample_ids):
            fh.write(sid + "," + ",".join(repr(float(v)) for v in values[:, j]) + "\n")


def read_predictions_csv(path):
    with _open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "sample_id":
            raise HarnessError(f"{path}: expected a sample_id,... header")
        names = tuple(header[1:])
        ids, rows = [], []
        for row in reader:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return names, tuple(ids), np.array(rows, dtype=float).T


def write_labels_csv(path, sample_ids, values):
    with _open(path, "w") as fh:
        fh.write("sample_id,y\n")
        for sid, v in zip(sample_ids, values):
            fh.write(f"{sid},{float(v)!r}\n")


def read_labels_csv(path):
    with _open(path) as fh:
        reader = csv.reader(fh)
        next(reader, None)
        ids, vals = [], []
        for row in reader:
            ids.append(row[0])
            vals.append(float(row[1]))
    return tuple(ids), np.array(vals, dtype=float)


def write_json(path, obj):
    with _open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with _open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise HarnessError(f"{path}: invalid JSON ({exc})") from None


def read_eval_csv(path):
    """Parse the estimator's comparison table into {method: row dict}."""
    out = {}
    with _open(path) as fh:
        for row in csv.DictReader(fh):
            method = row.get("method")
            if method is None:
                raise HarnessError(f"{path}: missing method column")
            out[method] = {
                "mse": float(row["mse"]) if row.get("mse") else None,
                "normalized_mse": (
                    float(row["normalized_mse"]) if row.get("normalized_mse") else None
                ),
                "band": row.get("band") or None,
                "note": row.get("note") or None,
            }
    if not out:
        raise HarnessError(f"{path}: empty comparison table")
    return out
