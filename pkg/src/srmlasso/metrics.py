"""Empirical risk, R^2 and the train-times-test GR^2 fit measure."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, ZeroTSS


@dataclass(frozen=True)
class FitMetrics:
    training_error: float
    generalization_error: float
    r2_train: float
    r2_test: float
    gr2: float
    bias_l2: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _coef(b, d: Dataset) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] != d.p:
        raise DimensionMismatch(f"coefficient vector of length {b.size} for p={d.p}")
    return b


def empirical_risk(b, d: Dataset) -> float:
    """Mean squared residual ``(1/n) ||y - X b||^2``."""
    r = d.y - d.X @ _coef(b, d)
    return float(r @ r / d.n)


def tss(d: Dataset) -> float:
    yc = d.y - d.y.mean()
    return float(yc @ yc / d.n)


def r_squared(b, d: Dataset) -> float:
    """``1 - risk / TSS`` with TSS taken around the evaluated sample's own mean."""
    total = tss(d)
    if total <= 0.0:
        raise ZeroTSS("response is constant on this sample")
    return 1.0 - empirical_risk(b, d) / total


def gr_squared(b, train: Dataset, test: Dataset) -> float:
    return r_squared(b, train) * r_squared(b, test)


def bias_l2(b, beta_true) -> float:
    b = np.asarray(b, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if b.shape != beta_true.shape:
        raise DimensionMismatch(f"shapes {b.shape} and {beta_true.shape} differ")
    return float(np.linalg.norm(b - beta_true))


def fit_metrics(b, train: Dataset, test: Dataset, beta_true=None) -> FitMetrics:
    """All fit measures of ``b`` on a train/test pair.

    Errors are in the units of ``train``/``test`` (standardized units when
    they are standardized). The bias compares ``beta_true`` with ``b`` mapped
    back to the original units through the training standardization.
    """
    r2_t = r_squared(b, train)
    r2_s = r_squared(b, test)
    bias = None
    if beta_true is not None:
        bias = bias_l2(train.to_raw_coefficients(b), beta_true)
    return FitMetrics(
        training_error=empirical_risk(b, train),
        generalization_error=empirical_risk(b, test),
        r2_train=r2_t,
        r2_test=r2_s,
        gr2=r2_t * r2_s,
        bias_l2=bias,
    )
