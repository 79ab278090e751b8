"""Reproduction harness: regressor zoo, dataset registry and resplit protocol.

Talks to the estimator exclusively through its CLI and file formats.
"""
from .build import build_ensemble
from .datasets import DATASET_NAMES, DEFAULT_SET, VAR_Y_EXPECTED, SplitData, load
from .errors import DatasetUnavailable, HarnessError
from .reproduce import METHODS, REFERENCE, aggregate, reproduce, run_repeat
from .zoo import ZOO_NAMES, build_zoo, train_predictions

__version__ = "0.1.0"

__all__ = [
    "DATASET_NAMES",
    "DEFAULT_SET",
    "METHODS",
    "REFERENCE",
    "VAR_Y_EXPECTED",
    "ZOO_NAMES",
    "DatasetUnavailable",
    "HarnessError",
    "SplitData",
    "aggregate",
    "build_ensemble",
    "build_zoo",
    "load",
    "reproduce",
    "run_repeat",
    "train_predictions",
    "__version__",
]
