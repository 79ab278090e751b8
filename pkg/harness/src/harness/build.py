"""Train the zoo on one resplit and export the prediction dump."""
import os

import numpy as np

from . import datasets, io, zoo
from .errors import HarnessError

__all__ = ["build_ensemble"]


def build_ensemble(dataset, seed, n_train=None, output_dir=".", n_heldout=None):
    """Write predictions.csv, labels.csv and moments.json for one split.

    Synthetic datasets additionally get signal.csv holding the noiseless
    regression function on the held-out rows; it is the scoring target
    for reproduction runs while labels.csv keeps the observation noise.
    Returns the written paths keyed by file stem.
    """
    split = datasets.load(dataset, seed, n_heldout=n_heldout, n_train=n_train)
    preds = zoo.train_predictions(split.x_train, split.y_train, split.x_heldout, seed)
    if not np.all(np.isfinite(preds)):
        raise HarnessError(f"{dataset}: a zoo member produced non-finite predictions")

    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as exc:
        raise HarnessError(f"{output_dir}: {exc.strerror or exc}") from None

    ids = tuple(f"s{i:06d}" for i in range(len(split.y_heldout)))
    paths = {
        "predictions": os.path.join(output_dir, "predictions.csv"),
        "labels": os.path.join(output_dir, "labels.csv"),
        "moments": os.path.join(output_dir, "moments.json"),
    }
    io.write_predictions_csv(paths["predictions"], zoo.ZOO_NAMES, ids, preds)
    io.write_labels_csv(paths["labels"], ids, split.y_heldout)
    io.write_json(paths["moments"], {
        "mean_y": float(split.y_heldout.mean()),
        "var_y": float(split.y_heldout.var()),
    })
    if split.heldout_signal is not None:
        paths["signal"] = os.path.join(output_dir, "signal.csv")
        io.write_labels_csv(paths["signal"], ids, split.heldout_signal)
    return paths
