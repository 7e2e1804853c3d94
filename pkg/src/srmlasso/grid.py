"""Penalty grids for the Lasso path."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

GEOMETRIC = "geometric"
LINEAR = "linear"


@dataclass(frozen=True)
class GridSpec:
    """Recipe for a strictly decreasing penalty sequence starting at lambda_max.

    ``GEOMETRIC`` spaces ``num_points`` values log-uniformly down to
    ``min_ratio * lambda_max``. ``LINEAR`` steps down from lambda_max by
    ``step`` (or, when ``step`` is None, by ``lambda_max / (num_points - 1)``)
    which mirrors stepping the penalty up from zero in fixed increments.
    ``include_zero`` appends lambda = 0 (OLS) when the training sample has more
    rows than columns.
    """

    mode: str = GEOMETRIC
    num_points: int = 100
    min_ratio: float = 1e-3
    step: float | None = None
    include_zero: bool = True

    def __post_init__(self):
        if self.mode not in (GEOMETRIC, LINEAR):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.num_points < 2:
            raise ValueError("num_points must be >= 2")
        if self.mode == GEOMETRIC and not 0.0 < self.min_ratio < 1.0:
            raise ValueError("min_ratio must lie in (0, 1)")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")

    def lambdas(self, lambda_max: float, n_train: int, p: int) -> np.ndarray:
        if lambda_max <= 0:
            # y orthogonal to every column: the zero model is optimal for all lambda
            lambda_max = 1.0
        if self.mode == GEOMETRIC:
            lams = lambda_max * np.geomspace(1.0, self.min_ratio, self.num_points)
        else:
            step = self.step if self.step is not None else lambda_max / (self.num_points - 1)
            lams = lambda_max - step * np.arange(self.num_points)
            lams = lams[lams > 0]
        lams[0] = lambda_max
        if self.include_zero:
            if n_train > p:
                lams = np.append(lams, 0.0)
            else:
                log.info("lambda = 0 dropped: unpenalized fit not unique with n=%d <= p=%d",
                         n_train, p)
        return lams


def validate_lambdas(lambdas) -> np.ndarray:
    lams = np.asarray(lambdas, dtype=float).ravel()
    if lams.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(lams < 0) or not np.all(np.isfinite(lams)):
        raise ValueError("lambdas must be finite and nonnegative")
    if lams.size > 1 and np.any(np.diff(lams) >= 0):
        raise ValueError("lambdas must be strictly decreasing")
    return lams
