"""File formats: prediction/label CSV, model and report JSON, eval tables.

Floats are written with repr, so every value survives a write/read
round trip bit-exactly.
"""
import csv
import json
import math

import numpy as np

from .errors import InputError
from .estimator import clamp_mse
from .model import FittedEnsemble, PredictionMatrix

_PRED_HEADER = "sample_id"


def _fmt(x):
    return repr(float(x))


def _open(path, mode="r"):
    try:
        return open(path, mode, newline="" if "b" not in mode else None)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _parse_float(text, where):
    try:
        val = float(text)
    except ValueError:
        raise InputError(f"{where}: could not parse {text!r} as a number") from None
    if not math.isfinite(val):
        raise InputError(f"{where}: value {text!r} is not finite")
    return val


def write_predictions_csv(path, preds):
    """Samples as rows, one column per regressor."""
    with _open(path, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow([_PRED_HEADER, *preds.regressor_names])
        for j, sid in enumerate(preds.sample_ids):
            writer.writerow([sid, *(_fmt(v) for v in preds.values[:, j])])


def read_predictions_csv(path):
    with _open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        if not header or header[0] != _PRED_HEADER:
            raise InputError(f"{path}: first header column must be {_PRED_HEADER!r}")
        names = [h.strip() for h in header[1:]]
        if not names:
            raise InputError(f"{path}: no regressor columns found")
        if len(set(names)) != len(names):
            raise InputError(f"{path}: duplicate regressor names in header")
        ids = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise InputError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {len(names) + 1}"
                )
            ids.append(row[0])
            rows.append([
                _parse_float(cell, f"{path}: line {lineno}, column {names[k]!r}")
                for k, cell in enumerate(row[1:])
            ])
    if not rows:
        raise InputError(f"{path}: no data rows")
    if len(set(ids)) != len(ids):
        raise InputError(f"{path}: duplicate sample ids")
    values = np.asarray(rows, dtype=np.float64).T
    return PredictionMatrix(regressor_names=tuple(names), sample_ids=tuple(ids), values=values)


def write_labels_csv(path, sample_ids, y):
    with _open(path, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow([_PRED_HEADER, "y"])
        for sid, val in zip(sample_ids, y):
            writer.writerow([sid, _fmt(val)])


def read_labels_csv(path):
    """Returns (sample_ids tuple, labels ndarray)."""
    with _open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        if len(header) != 2 or header[0] != _PRED_HEADER or header[1] != "y":
            raise InputError(f"{path}: label header must be 'sample_id,y'")
        ids = []
        vals = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InputError(f"{path}: line {lineno} has {len(row)} fields, expected 2")
            ids.append(row[0])
            vals.append(_parse_float(row[1], f"{path}: line {lineno}, column 'y'"))
    if not vals:
        raise InputError(f"{path}: no data rows")
    if len(set(ids)) != len(ids):
        raise InputError(f"{path}: duplicate sample ids")
    return tuple(ids), np.asarray(vals, dtype=np.float64)


def write_predicted_labels_csv(path, sample_ids, y_hat):
    with _open(path, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow([_PRED_HEADER, "y_hat"])
        for sid, val in zip(sample_ids, y_hat):
            writer.writerow([sid, _fmt(val)])


def read_json(path):
    try:
        with _open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def write_json(path, obj):
    with _open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_model_json(path, fit):
    write_json(path, fit.to_dict())


def read_model_json(path):
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: model file must hold a JSON object")
    return FittedEnsemble.from_dict(data)


def build_report(fit, diag, config):
    """Assemble the human- and machine-readable estimation report."""
    m = len(fit.regressor_names)
    order = np.argsort(fit.mse_estimates, kind="stable")
    rank = np.empty(m, dtype=int)
    rank[order] = np.arange(1, m + 1)
    clamped = clamp_mse(fit.mse_estimates)
    kept_set = set(fit.kept or ())
    weights_by_index = {}
    rho_hat_by_index = {}
    if fit.kept is not None:
        for pos, i in enumerate(fit.kept):
            weights_by_index[i] = float(fit.weights[pos])
            rho_hat_by_index[i] = float(fit.rho_hat[pos])

    regressors = []
    for i, name in enumerate(fit.regressor_names):
        pruned_by = []
        if diag.prune_abs_threshold is not None and fit.rho_initial[i] < diag.prune_abs_threshold:
            pruned_by.append("absolute")
        if diag.prune_rel_threshold is not None and fit.rho_initial[i] < diag.prune_rel_threshold:
            pruned_by.append("relative")
        regressors.append({
            "name": name,
            "mean": float(fit.regressor_means[i]),
            "bias": float(fit.regressor_means[i] - fit.mean_y),
            "rho_initial": float(fit.rho_initial[i]),
            "mse_estimate": float(fit.mse_estimates[i]),
            "mse_estimate_clamped": float(clamped[i]),
            "mse_rank": int(rank[i]),
            "kept": i in kept_set,
            "pruned_by": pruned_by if i not in kept_set else [],
            "weight": weights_by_index.get(i),
            "rho_hat": rho_hat_by_index.get(i),
        })

    eigen = {
        "values": fit.eigen.values.tolist(),
        "trace": diag.trace,
        "lambda2_trace_fraction": (
            float(fit.eigen.values[1]) / diag.trace
            if fit.eigen.count >= 2 and diag.trace > 0.0 else None
        ),
    }
    return {
        "difficulty": fit.difficulty,
        "stop_reason": fit.stop_reason,
        "mean_y": fit.mean_y,
        "var_y": fit.var_y,
        "g2_hat": fit.g2_hat,
        "g2_over_var_y": fit.g2_hat / fit.var_y,
        "g2_res_min": fit.g2_res_min,
        "g2_used_lambda_fallback": fit.g2_used_lambda_fallback,
        "residual_curve": {
            "stage": diag.curve_stage,
            "q": _float_list(diag.curve.qs),
            "res": _float_list(diag.curve.res),
            "degenerate": [bool(b) for b in diag.curve.degenerate],
            "collinear": diag.curve.collinear,
        },
        "eigen": eigen,
        "pruning": None if diag.prune_abs_threshold is None else {
            "abs_threshold": diag.prune_abs_threshold,
            "rel_threshold": diag.prune_rel_threshold,
        },
        "used_two_pcs": fit.used_two_pcs,
        "used_fallback_average": fit.used_fallback_average,
        "kept": list(fit.kept_names),
        "pruned": [n for i, n in enumerate(fit.regressor_names) if i not in kept_set],
        "regressors": regressors,
        "mse_ranking": [fit.regressor_names[i] for i in order],
        "config": config.to_dict(),
    }


def _float_list(arr):
    return [float(v) for v in arr]


def format_eval_table(rows):
    """Fixed-width text table for the evaluation comparison."""
    headers = ("method", "mse", "nmse", "band", "note")
    table = [headers]
    for row in rows:
        table.append((
            row["method"],
            "" if row["mse"] is None else f"{row['mse']:.6g}",
            "" if row["normalized_mse"] is None else f"{row['normalized_mse']:.4f}",
            row["band"] or "",
            row["note"] or "",
        ))
    widths = [max(len(r[k]) for r in table) for k in range(len(headers))]
    lines = []
    for t, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[k]) for k, cell in enumerate(row)).rstrip())
        if t == 0:
            lines.append("  ".join("-" * widths[k] for k in range(len(headers))))
    return "\n".join(lines)


def write_eval_csv(path, rows):
    with _open(path, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "mse", "normalized_mse", "band", "note"])
        for row in rows:
            writer.writerow([
                row["method"],
                "" if row["mse"] is None else _fmt(row["mse"]),
                "" if row["normalized_mse"] is None else _fmt(row["normalized_mse"]),
                row["band"] or "",
                row["note"] or "",
            ])
