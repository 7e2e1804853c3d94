"""Datasets, standardization, sample splitting and the equicorrelated Gaussian DGP.

Random numbers come from numpy's PCG64 bit generator. Replication ``r`` of a
run with master seed ``s`` draws from ``PCG64(SeedSequence(s ^ r))``, so any
replication can be regenerated on its own, in any order.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyStandardized,
    BadK,
    ConstantColumn,
    DegenerateSplit,
    DimensionMismatch,
    EmptyData,
    ParseError,
)
from .grid import GridSpec

PAPER_BETA1 = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0)


def _frozen(a, ndim):
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StandardizationParams:
    """Column means and population scales, used to transform any sample."""

    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float = 0.0
    y_scale: float = 1.0

    @classmethod
    def identity(cls, p: int) -> "StandardizationParams":
        return cls(np.zeros(p), np.ones(p), 0.0, 1.0)

    @property
    def p(self) -> int:
        return len(self.col_means)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response ``y`` (length n) and design ``X`` (n x p).

    When ``standardized`` is set, the ``col_means``/``col_scales``/``y_mean``/
    ``y_scale`` fields hold the statistics that were removed; otherwise they
    are the identity transform.
    """

    y: np.ndarray
    X: np.ndarray
    standardized: bool = False
    col_means: np.ndarray | None = None
    col_scales: np.ndarray | None = None
    y_mean: float = 0.0
    y_scale: float = 1.0

    def __post_init__(self):
        y = _frozen(self.y, 1)
        X = _frozen(self.X, 2)
        if y.shape[0] == 0 or X.shape[0] == 0:
            raise EmptyData("dataset has no rows")
        if X.shape[1] == 0:
            raise EmptyData("dataset has no covariates")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"y has {y.shape[0]} rows but X has {X.shape[0]}")
        p = X.shape[1]
        means = np.zeros(p) if self.col_means is None else self.col_means
        scales = np.ones(p) if self.col_scales is None else self.col_scales
        means, scales = _frozen(means, 1), _frozen(scales, 1)
        if means.shape[0] != p or scales.shape[0] != p:
            raise DimensionMismatch("standardization metadata does not match p")
        if np.any(scales <= 0) or self.y_scale <= 0:
            raise ValueError("scales must be strictly positive")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "col_means", means)
        object.__setattr__(self, "col_scales", scales)
        object.__setattr__(self, "y_mean", float(self.y_mean))
        object.__setattr__(self, "y_scale", float(self.y_scale))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def params(self) -> StandardizationParams:
        return StandardizationParams(self.col_means, self.col_scales, self.y_mean, self.y_scale)

    def subset(self, rows) -> "Dataset":
        """Rows of this dataset, keeping its standardization metadata."""
        rows = np.asarray(rows)
        return replace(self, y=self.y[rows], X=self.X[rows])

    def raw_subset(self, rows) -> "Dataset":
        """Rows of this dataset as a fresh, unstandardized sample."""
        rows = np.asarray(rows)
        return Dataset(self.y[rows], self.X[rows])

    def to_raw_coefficients(self, b) -> np.ndarray:
        """Map coefficients fitted in standardized units back to the original units."""
        return np.asarray(b, dtype=float) * self.y_scale / self.col_scales


@dataclass(frozen=True)
class FoldPlan:
    K: int
    assignment: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def test_rows(self, q: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == q)

    def train_rows(self, q: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != q)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.K)


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of the equicorrelated Gaussian design and of an experiment run."""

    n: int = 250
    p: int = 200
    beta1: tuple = PAPER_BETA1
    corr: float = 0.9
    noise_sd: float = 1.0
    replications: int = 50
    seed: int = 0
    K: int = 10
    lambda_grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        object.__setattr__(self, "beta1", tuple(float(b) for b in self.beta1))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.p < max(1, len(self.beta1)):
            raise ValueError("p must be >= len(beta1)")
        if not 0.0 <= self.corr < 1.0:
            raise ValueError("corr must lie in [0, 1)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")

    @property
    def beta(self) -> np.ndarray:
        b = np.zeros(self.p)
        b[: len(self.beta1)] = self.beta1
        return b


# ---------------------------------------------------------------------------
# standardization


def standardize(d: Dataset) -> tuple[Dataset, StandardizationParams]:
    """Center every column and y, and scale them to unit (1/n) second moment."""
    if d.standardized:
        raise AlreadyStandardized("dataset is already standardized")
    X, y = d.X, d.y
    means = X.mean(axis=0)
    Xc = X - means
    scales = np.sqrt(np.mean(Xc**2, axis=0))
    # relative test: a column equal to a constant up to rounding still counts as constant
    tiny = 1e-12 * np.maximum(np.abs(means), 1.0)
    bad = np.flatnonzero(scales <= tiny)
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    y_mean = float(y.mean())
    yc = y - y_mean
    y_scale = float(np.sqrt(np.mean(yc**2)))
    if y_scale <= 1e-12 * max(abs(y_mean), 1.0):
        raise ConstantColumn(None)
    params = StandardizationParams(means, scales, y_mean, y_scale)
    out = Dataset(yc / y_scale, Xc / scales, True, means, scales, y_mean, y_scale)
    return out, params


def apply_standardization(d: Dataset, params: StandardizationParams) -> Dataset:
    """Transform ``d`` with externally supplied (training-set) statistics."""
    if params.p != d.p:
        raise DimensionMismatch(f"params cover {params.p} columns, dataset has {d.p}")
    X = (d.X - params.col_means) / params.col_scales
    y = (d.y - params.y_mean) / params.y_scale
    return Dataset(y, X, True, params.col_means, params.col_scales, params.y_mean, params.y_scale)


# ---------------------------------------------------------------------------
# splitting


def split_validation(d: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random train/test partition with ``floor(train_fraction * n)`` training rows."""
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit("train_fraction must lie in (0, 1)")
    n_train = math.floor(train_fraction * d.n)
    if n_train < 1 or n_train >= d.n:
        raise DegenerateSplit(f"split of n={d.n} at {train_fraction} leaves an empty part")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(d.n)
    train_rows, test_rows = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    return d.subset(train_rows), d.subset(test_rows)


def kfold_plan(n: int, K: int, seed: int) -> FoldPlan:
    """Assign rows to K folds whose sizes differ by at most one."""
    if K < 2 or K > n:
        raise BadK(f"K must satisfy 2 <= K <= n, got K={K}, n={n}")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[perm] = np.arange(n) % K
    return FoldPlan(K, assignment, seed)


# ---------------------------------------------------------------------------
# simulation


def replication_rng(seed: int, replication_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed ^ replication_index)))


def _draw(cfg: SimulationConfig, rng: np.random.Generator, n: int, beta: np.ndarray):
    z0 = rng.standard_normal(n)
    Z = rng.standard_normal((n, cfg.p))
    X = math.sqrt(cfg.corr) * z0[:, None] + math.sqrt(1.0 - cfg.corr) * Z
    u = cfg.noise_sd * rng.standard_normal(n)
    return Dataset(X @ beta + u, X)


def simulate_dgp(cfg: SimulationConfig, replication_index: int = 0) -> tuple[Dataset, np.ndarray]:
    """One draw of ``n`` rows from y = X beta + u with equicorrelated Gaussian X.

    Each covariate is ``sqrt(corr) * z0 + sqrt(1 - corr) * z_j`` with a shared
    standard normal factor ``z0``, which gives unit variances and pairwise
    correlation exactly ``corr``.
    """
    data, _, beta = simulate_train_test(cfg, replication_index, 0)
    return data, beta


def simulate_train_test(cfg: SimulationConfig, replication_index: int, n_test: int):
    """Training draw of ``cfg.n`` rows plus an independent test draw of ``n_test`` rows.

    The training rows are identical to ``simulate_dgp(cfg, replication_index)``.
    Returns ``(train, test_or_None, beta)``.
    """
    rng = replication_rng(cfg.seed, replication_index)
    beta = cfg.beta
    train = _draw(cfg, rng, cfg.n, beta)
    test = _draw(cfg, rng, n_test, beta) if n_test > 0 else None
    return train, test, beta


# ---------------------------------------------------------------------------
# file I/O


def load_csv(path) -> Dataset:
    """Read ``y,x1,...,xp`` CSV with a header row; the first column is y."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(1, 1, "empty file")
        width = len(header)
        if width < 2:
            raise ParseError(1, 1, "need a response and at least one covariate")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DimensionMismatch(f"line {lineno}: expected {width} fields, got {len(row)}")
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(lineno, col, f"not a number: {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise EmptyData(f"{path}: no data rows")
    arr = np.array(rows)
    return Dataset(arr[:, 0], arr[:, 1:])


def save_csv(d: Dataset, path) -> None:
    header = ["y"] + [f"x{j + 1}" for j in range(d.p)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for yi, xi in zip(d.y, d.X):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


def save_json(report, path) -> None:
    """Write a report as sorted-key JSON; non-finite floats become null."""
    Path(path).write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
