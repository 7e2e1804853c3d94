"""OLS, Lasso by coordinate descent, and forward selection regression.

All solvers expect a standardized :class:`~srmlasso.data.Dataset` (columns
with zero mean and unit (1/n) second moment) and use the penalized objective

    (1/n) * ||y - X b||^2 + lam * ||b||_1,

so the all-zero solution is optimal exactly when ``lam >= 2 * max_j |x_j'y| / n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _cd
from .data import Dataset
from .errors import RankDeficient
from .grid import GridSpec, validate_lambdas

OLS = "OLS"
LASSO = "LASSO"
FSR = "FSR"

KKT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FitResult:
    coefficients: np.ndarray
    lambda_: float
    support: tuple
    training_error: float
    method: str
    iterations: int = 0
    converged: bool = True
    objective_history: np.ndarray | None = None
    selection_order: tuple | None = None

    @classmethod
    def build(cls, b, data: Dataset, lam, method, **kw) -> "FitResult":
        b = np.array(b, dtype=float)
        b.setflags(write=False)
        r = data.y - data.X @ b
        return cls(
            coefficients=b,
            lambda_=float(lam),
            support=tuple(int(j) for j in np.flatnonzero(b)),
            training_error=float(r @ r / data.n),
            method=method,
            **kw,
        )

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.coefficients).sum())

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "lambda": self.lambda_,
            "coefficients": self.coefficients,
            "support": list(self.support),
            "training_error": self.training_error,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.selection_order is not None:
            d["selection_order"] = list(self.selection_order)
        return d


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lambda_max(data: Dataset) -> float:
    """Smallest penalty whose Lasso solution is identically zero."""
    return float(2.0 * np.max(np.abs(data.X.T @ data.y)) / data.n)


def lambda_sequence(data: Dataset, grid) -> np.ndarray:
    """Resolve a :class:`GridSpec` (or pass through an explicit sequence)."""
    if isinstance(grid, GridSpec):
        return grid.lambdas(lambda_max(data), data.n, data.p)
    return validate_lambdas(grid)


def kkt_violation(b, data: Dataset, lam) -> float:
    """Largest violation of the Lasso optimality conditions at ``b``.

    With ``grad_j = (2/n) x_j'(y - Xb)``: zero coefficients need
    ``|grad_j| <= lam`` and nonzero ones need ``grad_j = lam * sign(b_j)``.
    """
    b = np.asarray(b, dtype=float)
    grad = 2.0 * data.X.T @ (data.y - data.X @ b) / data.n
    nz = b != 0
    viol = np.where(nz, np.abs(grad - lam * np.sign(b)), np.maximum(np.abs(grad) - lam, 0.0))
    return float(viol.max())


# ---------------------------------------------------------------------------
# OLS


def _check_full_rank(X: np.ndarray) -> None:
    n, p = X.shape
    if n < p:
        raise RankDeficient(f"n={n} < p={p}: X'X is singular; use forward selection")
    eig = np.linalg.eigvalsh(X.T @ X / n)
    if eig[0] <= 1e-10 * eig[-1]:
        raise RankDeficient(f"X'X numerically singular (min/max eigenvalue {eig[0] / eig[-1]:.3g})")


def ols_fit(train: Dataset) -> FitResult:
    _check_full_rank(train.X)
    b, *_ = scipy.linalg.lstsq(train.X, train.y, lapack_driver="gelsd")
    return FitResult.build(b, train, 0.0, OLS)


# ---------------------------------------------------------------------------
# Lasso


class _Gram:
    """Gram-form sufficient statistics of a dataset, shared along a path."""

    def __init__(self, data: Dataset):
        X = np.ascontiguousarray(data.X)
        self.G = np.asfortranarray(X.T @ X / data.n)
        self.c = X.T @ data.y / data.n
        self.yy = float(data.y @ data.y / data.n)
        self._more_rows = data.n > data.p
        self._full_rank = None

    @property
    def full_rank(self) -> bool:
        if self._full_rank is None:
            self._full_rank = self._more_rows and _is_full_rank(self.G)
        return self._full_rank


def _is_full_rank(G) -> bool:
    eig = np.linalg.eigvalsh(G)
    return eig[0] > 1e-10 * eig[-1]


def _polish(gram: _Gram, b, g, lam) -> bool:
    """Solve the optimality system on the current sign pattern of ``b``.

    Accepted (and written into ``b``/``g``) only when the solution keeps
    those signs and every excluded coordinate satisfies its subgradient
    bound, in which case it is the exact minimizer.
    """
    p = b.shape[0]
    if lam == 0.0:
        if not gram.full_rank:
            return False
        A = np.arange(p)
        s = np.zeros(p)
    else:
        A = np.flatnonzero(b)
        s = np.sign(b[A])
    if A.size == 0:
        return False
    try:
        bA = scipy.linalg.solve(gram.G[np.ix_(A, A)], gram.c[A] - 0.5 * lam * s, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return False
    if not np.all(np.isfinite(bA)):
        return False
    if lam > 0.0 and not np.array_equal(np.sign(bA), s):
        return False
    new_g = gram.c - gram.G[:, A] @ bA
    inactive = np.ones(p, dtype=bool)
    inactive[A] = False
    slack = 1e-12 * max(1.0, lam)
    if np.any(np.abs(new_g[inactive]) > 0.5 * lam + slack):
        return False
    if np.max(np.abs(new_g[A] - 0.5 * lam * s), initial=0.0) > 1e-9:
        # ill-conditioned solve; keep the coordinate-descent iterate
        return False
    b[:] = 0.0
    b[A] = bA
    g[:] = new_g
    return True


def _gram_violation(b, g, lam) -> float:
    grad = 2.0 * g
    viol = np.where(b != 0, np.abs(grad - lam * np.sign(b)), np.maximum(np.abs(grad) - lam, 0.0))
    return float(viol.max(initial=0.0))


def _solve(gram: _Gram, b, g, lam, tol, max_iter, polish, history):
    """Minimize at one penalty starting from (b, g); returns (sweeps, converged)."""
    sweeps = 0
    skip = np.full(b.shape[0], 2, dtype=np.int8)  # matches no sign pattern
    tried = set()
    empty = np.empty(0)
    while sweeps < max_iter:
        hist = history[sweeps:] if history is not None else empty
        status, used = _cd.cd_sweeps(gram.G, gram.c, gram.yy, b, g, lam, tol,
                                     max_iter - sweeps, polish, skip, hist)
        sweeps += used
        if status == _cd.EXHAUSTED:
            break
        skip = np.sign(b).astype(np.int8)
        key = skip.tobytes()
        if polish and key not in tried:
            tried.add(key)
            if _polish(gram, b, g, lam):
                return sweeps, True
        if status == _cd.CONVERGED:
            g[:] = gram.c - gram.G @ b
            if _gram_violation(b, g, lam) <= 0.5 * KKT_TOL or tol <= 1e-13:
                return sweeps, True
            # small steps can hide a sizable subgradient gap on ill-conditioned designs
            tol *= 0.01
    g[:] = gram.c - gram.G @ b
    return sweeps, False


def lasso_fit(
    train: Dataset,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 10_000,
    *,
    polish: bool = True,
    warm_start=None,
    record_history: bool = False,
) -> FitResult:
    """Lasso at a single penalty.

    Coordinate descent sweeps (soft-thresholding each coordinate at
    ``lam / 2``) run until no coordinate moves by ``tol`` or ``max_iter``
    sweeps have been spent; in the latter case ``converged`` is False and the
    last iterate is returned. With ``polish`` the solver additionally tries
    the exact solution of the optimality system on the sign pattern found by
    the sweeps, which only ever replaces the iterate by the true minimizer.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    gram = _Gram(train)
    b = np.zeros(train.p) if warm_start is None else np.array(warm_start, dtype=float)
    g = gram.c - gram.G @ b
    history = np.full(max_iter, np.nan) if record_history else None
    sweeps, ok = _solve(gram, b, g, float(lam), tol, max_iter, polish, history)
    if history is not None:
        history = history[:sweeps]
    return FitResult.build(b, train, lam, LASSO, iterations=sweeps, converged=ok,
                           objective_history=history)


def lasso_path(
    train: Dataset,
    grid=None,
    tol: float = 1e-7,
    max_iter: int = 10_000,
    *,
    polish: bool = True,
) -> list[FitResult]:
    """Warm-started Lasso fits along a decreasing penalty sequence.

    ``grid`` is a :class:`GridSpec` (default: 100 geometric points down to
    1e-3 * lambda_max) or an explicit strictly decreasing sequence.
    """
    lams = lambda_sequence(train, GridSpec() if grid is None else grid)
    gram = _Gram(train)
    b = np.zeros(train.p)
    g = gram.c.copy()
    fits = []
    for lam in lams:
        sweeps, ok = _solve(gram, b, g, float(lam), tol, max_iter, polish, None)
        fits.append(FitResult.build(b, train, lam, LASSO, iterations=sweeps, converged=ok))
    return fits


# ---------------------------------------------------------------------------
# forward selection


def fsr_fit(train: Dataset, corr_threshold: float = 1e-4, max_vars: int | None = None) -> FitResult:
    """Forward selection regression.

    Starting from the empty model, add the unselected column with the largest
    absolute correlation with the current residual and refit least squares on
    the selected set. Stops once that largest correlation drops below
    ``corr_threshold`` or ``max_vars`` columns are in. Ties go to the lowest
    column index; a column that is collinear with the selected ones is
    skipped. The refit is kept as a Gram-Schmidt factorization of the
    selected columns, updated one column at a time.
    """
    X, y = train.X, train.y
    n, p = X.shape
    if max_vars is None:
        max_vars = min(n - 1, p)
    if not 1 <= max_vars <= min(n - 1, p):
        raise ValueError(f"max_vars must lie in [1, {min(n - 1, p)}]")
    Q = np.empty((n, max_vars))
    col_norm = np.sqrt(np.einsum("ij,ij->j", X - X.mean(axis=0), X - X.mean(axis=0)))
    selected: list[int] = []
    excluded = np.zeros(p, dtype=bool)
    r = y.copy()
    while len(selected) < max_vars:
        rc = r - r.mean()
        r_norm = np.sqrt(rc @ rc)
        if r_norm <= 1e-14 * max(1.0, np.sqrt(y @ y)):
            break
        corr = np.abs(X.T @ rc) / (col_norm * r_norm)
        corr[excluded] = -np.inf
        k = len(selected)
        while True:
            j = int(np.argmax(corr))
            if corr[j] < corr_threshold:
                j = -1
                break
            v = X[:, j].copy()
            for _ in range(2):  # re-orthogonalize once for stability
                v -= Q[:, :k] @ (Q[:, :k].T @ v)
            nv = np.sqrt(v @ v)
            if nv > 1e-10 * np.sqrt(X[:, j] @ X[:, j]):
                break
            excluded[j] = True
            corr[j] = -np.inf
        if j < 0:
            break
        Q[:, k] = v / nv
        selected.append(j)
        excluded[j] = True
        r = r - Q[:, k] * (Q[:, k] @ r)
    b = np.zeros(p)
    if selected:
        Xs = X[:, selected]
        coef, *_ = scipy.linalg.lstsq(Xs, y, lapack_driver="gelsd")
        b[selected] = coef
    return FitResult.build(b, train, 0.0, FSR, iterations=len(selected),
                           selection_order=tuple(selected))
