"""Choosing the Lasso penalty by validation or K-fold cross-validation.

For every penalty on a common grid the Lasso is fitted on the training part,
its mean squared error on the held-out part is recorded, and the penalty with
the smallest (mean) held-out error wins. Ties go to the largest penalty.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, FoldPlan, apply_standardization, kfold_plan, standardize
from .errors import RankDeficient
from .grid import GridSpec
from .solvers import FitResult, fsr_fit, lambda_max, lambda_sequence, lasso_path, ols_fit

HOLDOUT = "HOLDOUT"
KFOLD = "KFOLD"


@dataclass(frozen=True, eq=False)
class CVPoint:
    lambda_: float
    mean_ge: float
    fold_ge: np.ndarray

    def to_dict(self) -> dict:
        return {"lambda": self.lambda_, "mean_ge": self.mean_ge, "fold_ge": self.fold_ge}


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Outcome of a penalty search.

    ``chosen`` is the fit at ``lambda_star`` in the units of ``data`` (the
    standardized training sample). For K-fold runs ``fold_lasso_fits`` holds
    the per-fold fits at ``lambda_star`` and ``fold_extremum_fits`` the
    unpenalized per-fold fits (OLS, or forward selection when OLS is
    infeasible) when they were requested.
    """

    chosen: FitResult
    lambda_star: float
    cv_curve: list
    plan: FoldPlan | None
    method: str
    data: Dataset
    test: Dataset | None = None
    fold_lasso_fits: list | None = None
    fold_extremum_fits: list | None = None
    path: list = field(default_factory=list, repr=False)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([pt.lambda_ for pt in self.cv_curve])

    @property
    def mean_ge(self) -> np.ndarray:
        return np.array([pt.mean_ge for pt in self.cv_curve])

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "lambda_star": self.lambda_star,
            "chosen": self.chosen.to_dict(),
            "K": None if self.plan is None else self.plan.K,
            "fold_assignment": None if self.plan is None else self.plan.assignment,
            "cv_curve": [pt.to_dict() for pt in self.cv_curve],
        }


def _held_out_errors(fits, test: Dataset) -> np.ndarray:
    B = np.stack([f.coefficients for f in fits])
    R = test.y[:, None] - test.X @ B.T
    return np.einsum("ij,ij->j", R, R) / test.n


def _argmin_largest_lambda(mean_ge: np.ndarray) -> int:
    # curve is ordered by decreasing lambda, so the first minimum is the largest lambda
    return int(np.argmin(mean_ge))


def extremum_fit(train: Dataset, **fsr_kw) -> FitResult:
    """Unpenalized least squares, falling back to forward selection when X'X is singular."""
    try:
        return ols_fit(train)
    except RankDeficient:
        return fsr_fit(train, **fsr_kw)


def holdout_lasso(train: Dataset, test: Dataset, grid=None, tol=1e-7, max_iter=10_000) -> SelectionResult:
    """Pick the penalty whose training-set fit has the smallest error on ``test``.

    ``train`` should be standardized and ``test`` transformed with the
    training statistics; an unstandardized pair is standardized that way here.
    """
    if not train.standardized:
        train, params = standardize(train)
        test = apply_standardization(test, params)
    path = lasso_path(train, GridSpec() if grid is None else grid, tol, max_iter)
    ge = _held_out_errors(path, test)
    curve = [CVPoint(f.lambda_, float(e), np.array([e])) for f, e in zip(path, ge)]
    i = _argmin_largest_lambda(ge)
    return SelectionResult(
        chosen=path[i], lambda_star=path[i].lambda_, cv_curve=curve, plan=None,
        method=HOLDOUT, data=train, test=test, path=path,
    )


def cv_lasso(
    d: Dataset,
    K: int = 10,
    grid=None,
    seed: int = 0,
    tol: float = 1e-7,
    max_iter: int = 10_000,
    *,
    extremum: bool = False,
    fsr_kw: dict | None = None,
) -> SelectionResult:
    """K-fold cross-validated Lasso.

    Each fold's training part is standardized with its own statistics and
    the held-out fold is transformed with them. All folds share one penalty
    grid, anchored at lambda_max of the full standardized sample; lambda = 0
    is kept only if every fold's training part has more rows than columns.
    The final model is refitted on the full sample at the selected penalty.
    """
    grid = GridSpec() if grid is None else grid
    full = d if d.standardized else standardize(d)[0]
    plan = kfold_plan(d.n, K, seed)
    if isinstance(grid, GridSpec):
        n_train_min = d.n - int(plan.sizes().max())
        lams = grid.lambdas(lambda_max(full), n_train_min, d.p)
    else:
        lams = lambda_sequence(full, grid)

    fold_ge = np.empty((lams.size, K))
    fold_paths = []
    for q in range(K):
        tr, params = standardize(d.raw_subset(plan.train_rows(q)))
        te = apply_standardization(d.raw_subset(plan.test_rows(q)), params)
        path = lasso_path(tr, lams, tol, max_iter)
        fold_ge[:, q] = _held_out_errors(path, te)
        fold_paths.append(path)
    mean_ge = fold_ge.mean(axis=1)
    i = _argmin_largest_lambda(mean_ge)
    curve = [CVPoint(float(lam), float(m), fold_ge[j].copy()) for j, (lam, m) in enumerate(zip(lams, mean_ge))]

    refit = lasso_path(full, lams[: i + 1], tol, max_iter)
    fold_extremum = None
    if extremum:
        fold_extremum = [extremum_fit(full.subset(plan.train_rows(k)), **(fsr_kw or {}))
                         for k in range(K)]
    return SelectionResult(
        chosen=refit[-1], lambda_star=float(lams[i]), cv_curve=curve, plan=plan,
        method=KFOLD, data=full, fold_lasso_fits=[p[i] for p in fold_paths],
        fold_extremum_fits=fold_extremum, path=refit,
    )


def fold_error_matrix(result: SelectionResult, fold_fits) -> np.ndarray:
    """``E[k, q]``: held-out error of the fold-k fit on test fold q (full-sample units)."""
    data, plan = result.data, result.plan
    K = plan.K
    E = np.empty((K, K))
    for q in range(K):
        te = data.subset(plan.test_rows(q))
        E[:, q] = _held_out_errors(fold_fits, te)
    return E


def worst_fold(result: SelectionResult, fold_fits=None):
    """Fold pair (k*, q*) maximizing the held-out error of the k-th unpenalized fit on fold q.

    Returns ``(k_star, q_star, fit)`` with ``fit`` the k*-th unpenalized fit.
    Ties go to the smallest (k, q) in lexicographic order.
    """
    if result.plan is None:
        raise ValueError("worst_fold needs a K-fold selection result")
    fold_fits = result.fold_extremum_fits if fold_fits is None else fold_fits
    if fold_fits is None or len(fold_fits) != result.plan.K:
        raise ValueError("need one unpenalized fit per fold")
    E = fold_error_matrix(result, fold_fits)
    k, q = np.unravel_index(int(np.argmax(E)), E.shape)
    return int(k), int(q), fold_fits[k]


def support_lambda_interval(data: Dataset, support, max_patterns: int = 4096):
    """Penalties at which the Lasso solution has exactly the given support.

    On a fixed support ``S`` with signs ``s`` the solution is affine in the
    penalty, ``b_S = G_SS^{-1} (c_S - lam s / 2)``, so keeping those signs and
    the subgradient bounds off ``S`` cuts out an interval of penalties. Every
    sign pattern is tried; the first one with a nonempty open interval wins.
    Returns ``(lo, hi, signs)`` or ``None`` when no penalty gives ``S``.
    Assumes ``G_SS`` is nonsingular.
    """
    S = np.asarray(sorted(int(j) for j in support), dtype=np.intp)
    k = S.size
    if k == 0:
        lmax = lambda_max(data)
        return (lmax, np.inf, np.zeros(0))
    if 2**k > max_patterns:
        raise ValueError(f"2^{k} sign patterns exceed the budget of {max_patterns}")
    G = data.X.T @ data.X / data.n
    c = data.X.T @ data.y / data.n
    off = np.setdiff1d(np.arange(data.p), S)
    G_SS = G[np.ix_(S, S)]
    u = np.linalg.solve(G_SS, c[S])
    alpha = c[off] - G[np.ix_(off, S)] @ u
    for bits in itertools.product((1.0, -1.0), repeat=k):
        s = np.array(bits)
        v = 0.5 * np.linalg.solve(G_SS, s)
        beta = G[np.ix_(off, S)] @ v
        # constraints A + lam * B <= 0; the sign ones are strict
        A = np.concatenate([-s * u, alpha, -alpha])
        B = np.concatenate([s * v, beta - 0.5, -beta - 0.5])
        lo, hi = 0.0, np.inf
        feasible = True
        for a, b in zip(A, B):
            if b > 0:
                hi = min(hi, -a / b)
            elif b < 0:
                lo = max(lo, -a / b)
            elif a > 0:
                feasible = False
                break
        if feasible and lo < hi:
            return (float(lo), float(hi), s)
    return None
