"""The ten-regressor ensemble trained on every dataset.

Hyperparameters are fixed; where a member calls for cross validation it
is 3-fold on the training split. Features are fed raw, so the
scale-sensitive members degrade on wide-range inputs by design: the
ensemble is meant to mix strong and weak experts.
"""
import warnings

import numpy as np
from sklearn.ensemble import BaggingRegressor, RandomForestRegressor
from sklearn.exceptions import ConvergenceWarning
from sklearn.kernel_ridge import KernelRidge
from sklearn.linear_model import Lasso, OrthogonalMatchingPursuit, Ridge
from sklearn.model_selection import GridSearchCV
from sklearn.svm import SVR, LinearSVR
from sklearn.tree import DecisionTreeRegressor

__all__ = ["ZOO_NAMES", "build_zoo", "train_predictions"]

ZOO_NAMES = (
    "ridge",
    "kernel_ridge",
    "lasso",
    "omp",
    "linear_svr",
    "svr_rbf",
    "tree_depth4",
    "tree_full",
    "random_forest",
    "bagging",
)


def build_zoo(seed):
    """Return the ten (name, unfitted estimator) pairs for one split seed."""
    estimators = (
        Ridge(alpha=0.5),
        GridSearchCV(KernelRidge(), {"kernel": ["polynomial", "rbf", "sigmoid"]}, cv=3),
        Lasso(alpha=0.1),
        OrthogonalMatchingPursuit(),
        # high iteration cap: liblinear needs it to reach the C=1 optimum
        # on raw features; left truncated it emits seed-lottery garbage
        LinearSVR(C=1.0, max_iter=500_000, random_state=seed + 4),
        # gamma fixed at 1/n_features so the kernel width does not adapt
        # to feature scale; the scale-aware default would hide the weak
        # experts the reference results rely on
        GridSearchCV(SVR(kernel="rbf", gamma="auto"), {"C": [0.01, 0.1, 1.0, 10.0]}, cv=3),
        DecisionTreeRegressor(max_depth=4, random_state=seed),
        DecisionTreeRegressor(random_state=seed + 1),
        RandomForestRegressor(n_estimators=100, random_state=seed + 2),
        BaggingRegressor(random_state=seed + 3),
    )
    return list(zip(ZOO_NAMES, estimators))


def train_predictions(x_train, y_train, x_heldout, seed):
    """Fit the zoo and return its held-out predictions, one row per member."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        # singular kernel matrices are routine here: raw wide-range
        # features drive the polynomial and sigmoid kernels degenerate
        warnings.simplefilter("ignore", UserWarning)
        for _, est in build_zoo(seed):
            est.fit(x_train, y_train)
            rows.append(np.asarray(est.predict(x_heldout), dtype=float))
    return np.vstack(rows)
