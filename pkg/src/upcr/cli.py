"""Command-line interface.

Subcommands: estimate (fit from a prediction matrix and known response
moments), predict (apply a saved model), simulate (draw a synthetic
ensemble), eval (compare combiners against labels).

Exit codes: 0 success, 2 input error, 3 hard-problem verdict from
estimate, 4 numerical failure.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import formats
from .baselines import (
    ensemble_mean,
    ensemble_median,
    evaluate,
    gem_weights,
    misfit_covariance,
    oracle_weights,
)
from .errors import InputError, NumericalError
from .estimator import center_predictions, predict, upcr_fit_with_diagnostics
from .model import (
    DIFFICULTY_TRACTABLE,
    LOSSES,
    PipelineConfig,
    PredictionMatrix,
    ResponseMoments,
)
from .synth import SignalSpec, SyntheticEnsembleSpec, generate

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_HARD = 3
EXIT_NUMERICAL_ERROR = 4

_MOMENT_KEYS = ("mean_y", "var_y")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="upcr",
        description="Unsupervised ensemble regression from prediction matrices alone.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_flags(p, with_moments=True):
        if with_moments:
            p.add_argument("--mean-y", type=float, default=None,
                           help="response mean (alternative: config JSON)")
            p.add_argument("--var-y", type=float, default=None,
                           help="response variance (alternative: config JSON)")
        p.add_argument("--config", default=None,
                       help="JSON file with pipeline settings and optionally mean_y/var_y")
        p.add_argument("--loss", choices=LOSSES, default=None,
                       help="pairwise fitting loss (default squared)")
        p.add_argument("--grid-points", type=int, default=None,
                       help="signal-variance grid resolution (default 201)")
        p.add_argument("--eps-l", type=float, default=None,
                       help="hard-problem threshold on g2/var_y (default 0.1)")

    p_est = sub.add_parser("estimate", help="fit an ensemble without labels")
    p_est.add_argument("--predictions", required=True, help="prediction matrix CSV")
    add_pipeline_flags(p_est)
    p_est.add_argument("--output", default=None, help="report JSON path (default stdout)")
    p_est.add_argument("--model", default=None, help="fitted model JSON path")
    p_est.set_defaults(func=cmd_estimate)

    p_pred = sub.add_parser("predict", help="apply a fitted model")
    p_pred.add_argument("--model", required=True, help="fitted model JSON")
    p_pred.add_argument("--predictions", required=True, help="prediction matrix CSV")
    p_pred.add_argument("--output", default=None, help="prediction CSV path (default stdout)")
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="draw a synthetic ensemble")
    p_sim.add_argument("--spec", default=None, help="JSON file with generator settings")
    p_sim.add_argument("--m", type=int, default=None, help="number of experts")
    p_sim.add_argument("--n", type=int, default=None, help="number of samples")
    p_sim.add_argument("--signal", default=None,
                       choices=("normal", "friedman1", "friedman2", "friedman3"),
                       help="conditional-mean signal kind")
    p_sim.add_argument("--g2", type=float, default=None,
                       help="signal variance (normal signal only)")
    p_sim.add_argument("--signal-mean", type=float, default=None,
                       help="signal mean (normal signal only)")
    p_sim.add_argument("--epsilon", type=float, default=None, help="deviation scale")
    p_sim.add_argument("--h-variances", default=None,
                       help="comma-separated deviation variances (single value broadcasts)")
    p_sim.add_argument("--a-values", default=None,
                       help="comma-separated signal alignments (default all zero)")
    p_sim.add_argument("--noise-on-y", type=float, default=None,
                       help="label noise variance (default 0)")
    p_sim.add_argument("--seed", type=int, default=None, help="generator seed (default 0)")
    p_sim.add_argument("--output-dir", default=".",
                       help="directory for predictions.csv, labels.csv, moments.json, truth.json")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("eval", help="compare combiners against labels")
    p_eval.add_argument("--predictions", required=True, help="prediction matrix CSV")
    p_eval.add_argument("--labels", required=True, help="label CSV")
    add_pipeline_flags(p_eval)
    p_eval.add_argument("--output", default=None, help="comparison table CSV path")
    p_eval.set_defaults(func=cmd_eval)
    return parser


def _resolve_settings(args, need_moments):
    """Merge config file and flags into (PipelineConfig, ResponseMoments | None).

    Flags override the config file.  Moments are never inferred from
    labels here; eval fills them in separately when absent.
    """
    file_cfg = {}
    if args.config is not None:
        raw = formats.read_json(args.config)
        if not isinstance(raw, dict):
            raise InputError(f"{args.config}: config must be a JSON object")
        file_cfg = dict(raw)
    moment_vals = {k: file_cfg.pop(k, None) for k in _MOMENT_KEYS}
    if args.mean_y is not None:
        moment_vals["mean_y"] = args.mean_y
    if args.var_y is not None:
        moment_vals["var_y"] = args.var_y

    for flag, key in (("loss", "loss"), ("grid_points", "grid_points"), ("eps_l", "eps_l")):
        val = getattr(args, flag)
        if val is not None:
            file_cfg[key] = val
    config = PipelineConfig.from_dict(file_cfg)

    have = [k for k in _MOMENT_KEYS if moment_vals[k] is not None]
    if len(have) == 1:
        raise InputError("mean_y and var_y must be supplied together")
    if not have:
        if need_moments:
            raise InputError(
                "response moments required: pass --mean-y and --var-y or a config JSON with them"
            )
        return config, None
    return config, ResponseMoments(mean_y=moment_vals["mean_y"], var_y=moment_vals["var_y"])


def cmd_estimate(args):
    preds = formats.read_predictions_csv(args.predictions)
    config, moments = _resolve_settings(args, need_moments=True)
    fit, diag = upcr_fit_with_diagnostics(preds, moments, config)
    report = formats.build_report(fit, diag, config)
    if args.output is None:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        formats.write_json(args.output, report)
    if args.model is not None:
        formats.write_model_json(args.model, fit)
    if fit.difficulty != DIFFICULTY_TRACTABLE:
        print(f"hard problem: {fit.stop_reason}", file=sys.stderr)
        return EXIT_HARD
    return EXIT_OK


def cmd_predict(args):
    fit = formats.read_model_json(args.model)
    preds = formats.read_predictions_csv(args.predictions)
    y_hat = predict(fit, preds)
    if args.output is None:
        sys.stdout.write("sample_id,y_hat\n")
        for sid, val in zip(preds.sample_ids, y_hat):
            sys.stdout.write(f"{sid},{float(val)!r}\n")
    else:
        formats.write_predicted_labels_csv(args.output, preds.sample_ids, y_hat)
    return EXIT_OK


def _parse_float_list(text, what):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise InputError(f"{what} must be a comma-separated list of numbers") from None


def cmd_simulate(args):
    raw = {}
    if args.spec is not None:
        raw = formats.read_json(args.spec)
        if not isinstance(raw, dict):
            raise InputError(f"{args.spec}: spec must be a JSON object")
    signal_raw = dict(raw.get("signal", {}))
    if args.signal is not None:
        signal_raw["kind"] = args.signal
    if args.g2 is not None:
        signal_raw["g2"] = args.g2
    if args.signal_mean is not None:
        signal_raw["mean"] = args.signal_mean
    if "kind" not in signal_raw:
        raise InputError("simulate requires a signal kind (--signal or spec JSON)")
    signal = SignalSpec(kind=signal_raw.pop("kind"),
                        g2=signal_raw.pop("g2", None),
                        mean=signal_raw.pop("mean", 0.0))
    if signal_raw:
        raise InputError(f"unknown signal keys: {sorted(signal_raw)}")

    fields = {
        "m": args.m if args.m is not None else raw.get("m"),
        "n": args.n if args.n is not None else raw.get("n"),
        "epsilon": args.epsilon if args.epsilon is not None else raw.get("epsilon"),
        "h_variances": (_parse_float_list(args.h_variances, "--h-variances")
                        if args.h_variances is not None else raw.get("h_variances")),
        "a_values": (_parse_float_list(args.a_values, "--a-values")
                     if args.a_values is not None else raw.get("a_values")),
        "noise_on_y": (args.noise_on_y if args.noise_on_y is not None
                       else raw.get("noise_on_y", 0.0)),
        "seed": args.seed if args.seed is not None else raw.get("seed", 0),
    }
    for key in ("m", "n", "epsilon", "h_variances"):
        if fields[key] is None:
            raise InputError(f"simulate requires {key} (flag or spec JSON)")
    spec = SyntheticEnsembleSpec(signal=signal, **fields)
    preds, y, truth = generate(spec)

    try:
        os.makedirs(args.output_dir, exist_ok=True)
    except OSError as exc:
        raise InputError(f"{args.output_dir}: {exc.strerror or exc}") from None
    pred_path = os.path.join(args.output_dir, "predictions.csv")
    label_path = os.path.join(args.output_dir, "labels.csv")
    moments_path = os.path.join(args.output_dir, "moments.json")
    truth_path = os.path.join(args.output_dir, "truth.json")
    formats.write_predictions_csv(pred_path, preds)
    formats.write_labels_csv(label_path, preds.sample_ids, y)
    formats.write_json(moments_path, {"mean_y": truth.mean_y, "var_y": truth.var_y})
    formats.write_json(truth_path, truth.to_dict())
    print(f"wrote {pred_path}, {label_path}, {moments_path}, {truth_path}")
    return EXIT_OK


def _join_labels(preds, label_ids, y):
    by_id = dict(zip(label_ids, y))
    missing = [sid for sid in preds.sample_ids if sid not in by_id]
    if missing:
        raise InputError(
            f"labels are missing {len(missing)} sample ids (first: {missing[0]!r})"
        )
    return np.array([by_id[sid] for sid in preds.sample_ids])


def cmd_eval(args):
    preds = formats.read_predictions_csv(args.predictions)
    label_ids, raw_y = formats.read_labels_csv(args.labels)
    y = _join_labels(preds, label_ids, raw_y)
    config, moments = _resolve_settings(args, need_moments=False)
    if moments is None:
        var = float(y.var())
        if var <= 0.0:
            raise InputError("labels have zero variance; supply --mean-y/--var-y")
        moments = ResponseMoments(mean_y=float(y.mean()), var_y=var)
        print(f"moments from labels: mean_y={moments.mean_y:.6g} var_y={moments.var_y:.6g}",
              file=sys.stderr)

    fit, _ = upcr_fit_with_diagnostics(preds, moments, config)
    rows = []

    def add_row(method, y_hat=None, note=None):
        if y_hat is None:
            rows.append({"method": method, "mse": None, "normalized_mse": None,
                         "band": None, "note": note})
            return
        result = evaluate(y_hat, y, moments)
        rows.append({"method": method, "mse": result.mse,
                     "normalized_mse": result.normalized_mse,
                     "band": result.band, "note": note})

    if fit.difficulty == DIFFICULTY_TRACTABLE:
        add_row("upcr", predict(fit, preds),
                "fallback average" if fit.used_fallback_average else None)
    else:
        add_row("upcr", note=f"hard problem: {fit.stop_reason}")
    add_row("mean", ensemble_mean(preds))
    add_row("median", ensemble_median(preds))

    per_expert = [float(np.mean((preds.values[i] - y) ** 2))
                  for i in range(preds.n_regressors)]
    best = int(np.argmin(per_expert))
    add_row("best_single", preds.values[best], preds.regressor_names[best])
    est_best = int(np.argmin(fit.mse_estimates))
    add_row("est_best_single", preds.values[est_best], preds.regressor_names[est_best])

    centered = center_predictions(preds, moments)
    oracle = oracle_weights(centered.z, y, moments)
    y_oracle = moments.mean_y + centered.z.T @ oracle.weights
    add_row("oracle", y_oracle, "rank deficient" if oracle.rank_deficient else None)

    try:
        w_gem = gem_weights(misfit_covariance(preds, y))
        add_row("gem", w_gem @ preds.values)
    except NumericalError as exc:
        add_row("gem", note=str(exc))

    print(formats.format_eval_table(rows))
    if args.output is not None:
        formats.write_eval_csv(args.output, rows)
    return EXIT_OK


def main(argv=None):
    """Run the CLI in-process; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


def entrypoint():
    sys.exit(main())
