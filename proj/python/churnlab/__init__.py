"""Churn modeling experiments: synthetic RFM panels, L1 logistic regression,
LSTM probability stacking, and profit-based evaluation."""

from churnlab._core import (
    LogisticModel,
    LstmModel,
    Panel,
    agg_mean,
    agg_mean_first_diff,
    auc,
    empc,
    empc_bruteforce,
    fit_l1_logistic,
    generate_synthetic,
    lift,
    load_csv,
    normalized_lagged,
    run_experiment,
    train_lstm,
)

__all__ = [
    "LogisticModel",
    "LstmModel",
    "Panel",
    "agg_mean",
    "agg_mean_first_diff",
    "auc",
    "empc",
    "empc_bruteforce",
    "fit_l1_logistic",
    "generate_synthetic",
    "lift",
    "load_csv",
    "normalized_lagged",
    "run_experiment",
    "train_lstm",
]
