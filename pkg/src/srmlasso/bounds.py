"""Computable generalization-error bounds for extremum and Lasso estimators.

Every bound compares an unpenalized fit ``b_train`` (OLS, or forward
selection when OLS is infeasible) with a Lasso fit ``b_lasso`` tuned on held
out data. The right-hand sides combine

* a VC complexity term ``eps`` that inflates the training error to an upper
  bound on the population risk,
* a cross term controlling how the training-set residual correlates with the
  test design, and
* a Bahr-Esseen slack ``varsigma`` between empirical and population risk.

``varsigma`` needs population moments of the loss; here it is always the
plug-in estimate from the test-set losses of ``b_train``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import (
    DimensionMismatch,
    EpsilonTooLarge,
    NonPositiveRatio,
    RankDeficient,
    TooLargeS,
    ZeroMeanLoss,
    ZeroRestrictedEigenvalue,
)

LEMMA1 = "LEMMA1"
THEOREM1 = "THEOREM1"
THEOREM2 = "THEOREM2"
THEOREM3 = "THEOREM3"
THEOREM4 = "THEOREM4"
COROLLARY2 = "COROLLARY2"
COROLLARY3 = "COROLLARY3"
COROLLARY4 = "COROLLARY4"

DEFAULT_VARPI = 0.9
DEFAULT_MOMENT_ORDER = 2.0
ENUMERATION_BUDGET = 1_000_000
HOLDS_TOL = 1e-12
_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class VCParams:
    """VC dimension ``h``, training size ``n_t`` and confidence ``eta``.

    ``eta`` defaults to ``1 / n_t``.
    """

    h: float
    n_t: float
    eta: float | None = None

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("VC dimension h must be >= 1")
        if self.n_t < 1:
            raise ValueError("n_t must be >= 1")
        eta = 1.0 / self.n_t if self.eta is None else self.eta
        if not 0.0 < eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        object.__setattr__(self, "eta", float(eta))


@dataclass(frozen=True)
class BoundReport:
    """All pieces of one evaluated bound.

    ``rhs`` is always ``overfit_gap + cross_term + varsigma_term``; the
    bound-specific shape (signed gap, absolute value, square roots, division
    by an eigenvalue) is already applied to each term. ``eigenvalue`` is the
    curvature constant used (``None`` for prediction-space bounds) and does
    not enter the sum.
    """

    name: str
    lhs: float
    rhs: float
    rhs_terms: dict
    nominal_prob: float
    holds: bool
    epsilon: float
    varsigma: float
    details: dict = field(default_factory=dict)

    def recombined_rhs(self) -> float:
        t = self.rhs_terms
        return t["overfit_gap"] + t["cross_term"] + t["varsigma_term"]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "nominal_prob": self.nominal_prob,
            "epsilon": self.epsilon,
            "varsigma": self.varsigma,
            "varsigma_plug_in": True,
            "rhs_terms": dict(self.rhs_terms),
            "details": dict(self.details),
        }


# ---------------------------------------------------------------------------
# scalar ingredients


def vc_epsilon(params: VCParams) -> float:
    """``eps = (h ln(n_t/h) + h - ln eta) / n_t``.

    Raises NonPositiveRatio when the value is negative (``n_t`` far below
    ``h``), where ``sqrt(eps)`` is undefined.
    """
    h, n_t, eta = float(params.h), float(params.n_t), params.eta
    eps = (h * math.log(n_t / h) + h - math.log(eta)) / n_t
    if eps < 0.0:
        raise NonPositiveRatio(f"eps = {eps:.4g} < 0 for h={h:g}, n_t={n_t:g}")
    return eps


def vc_bound(training_error: float, epsilon: float) -> float:
    """Training error inflated to a population-risk bound: ``e_t / (1 - sqrt(eps))``."""
    if epsilon < 0.0:
        raise NonPositiveRatio(f"eps = {epsilon:.4g} < 0")
    if epsilon >= 1.0:
        raise EpsilonTooLarge(f"eps = {epsilon:.6g} >= 1, the VC bound is vacuous")
    return training_error / (1.0 - math.sqrt(epsilon))


def srm_rate(n_t: float, h: float, tau: float, r_n: float = 0.0) -> float:
    """Convergence rate ``r_n + tau * sqrt(h ln(n_t) / n_t)``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if n_t <= 1:
        raise ValueError("n_t must exceed 1")
    return r_n + tau * math.sqrt(h * math.log(n_t) / n_t)


def bahr_esseen_varsigma(losses, q_m: float = DEFAULT_MOMENT_ORDER, varpi: float = DEFAULT_VARPI) -> float:
    """Plug-in Bahr-Esseen slack from a sample of test-set losses.

    With ``m = mean(loss)`` and ``tau = mean(loss**q_m)**(1/q_m) / m``,

        varsigma = 2**(1/q_m) * tau * m / ((1 - varpi)**(1/q_m) * n_s**(1 - 1/q_m)).
    """
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise ValueError("need at least one loss")
    if np.any(losses < 0):
        raise ValueError("losses must be nonnegative")
    if not 1.0 < q_m <= 2.0:
        raise ValueError("moment order q_m must lie in (1, 2]")
    if not 0.0 < varpi < 1.0:
        raise ValueError("varpi must lie in (0, 1)")
    mean = float(losses.mean())
    if mean <= 0.0:
        raise ZeroMeanLoss("mean loss is zero; tau is undefined")
    tau = float(np.mean(losses**q_m)) ** (1.0 / q_m) / mean
    n_s = losses.size
    return 2.0 ** (1.0 / q_m) * tau * mean / ((1.0 - varpi) ** (1.0 / q_m) * n_s ** (1.0 - 1.0 / q_m))


def nominal_probability(varpi: float, n_t: float) -> float:
    return varpi * (1.0 - 1.0 / n_t)


# ---------------------------------------------------------------------------
# eigenvalues


def _gram(d: Dataset) -> np.ndarray:
    return d.X.T @ d.X / d.n


def min_eigenvalue(d: Dataset) -> float:
    """Smallest eigenvalue of ``X'X / n``, with round-off negatives clamped to 0."""
    return max(float(np.linalg.eigvalsh(_gram(d))[0]), 0.0)


def restricted_eigenvalue(d: Dataset, s: int, budget: int = ENUMERATION_BUDGET) -> float:
    """Smallest eigenvalue over all ``s x s`` principal submatrices of ``X'X / n``.

    By eigenvalue interlacing a principal submatrix never has a smaller
    minimum eigenvalue than the submatrices containing it, so the minimum
    over supports of size at most ``s`` is attained at size exactly ``s``.
    The enumeration is exhaustive; TooLargeS is raised when it would visit
    more than ``budget`` supports.
    """
    p = d.p
    s = int(s)
    if not 1 <= s <= p:
        raise ValueError(f"support size must lie in [1, {p}]")
    count = math.comb(p, s)
    if count > budget:
        raise TooLargeS(f"C({p}, {s}) = {count} supports exceed the budget of {budget}")
    G = _gram(d)
    if s == p:
        return max(float(np.linalg.eigvalsh(G)[0]), 0.0)
    chunk = max(1, 4_000_000 // (s * s))
    combos = itertools.combinations(range(p), s)
    best = np.inf
    while True:
        idx = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)),
                          dtype=np.intp)
        if idx.size == 0:
            break
        idx = idx.reshape(-1, s)
        sub = G[idx[:, :, None], idx[:, None, :]]
        best = min(best, float(np.linalg.eigvalsh(sub)[:, 0].min()))
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# bounds


def _vec(b, p) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (p,):
        raise DimensionMismatch(f"coefficient vector of shape {b.shape} for p={p}")
    return b


def _sq(r) -> float:
    return float(r @ r)


def _report(name, lhs, gap, cross, slack, eigenvalue, nominal, eps, varsigma, **details):
    terms = {"overfit_gap": float(gap), "cross_term": float(cross),
             "varsigma_term": float(slack), "eigenvalue": eigenvalue}
    rhs = terms["overfit_gap"] + terms["cross_term"] + terms["varsigma_term"]
    return BoundReport(name=name, lhs=float(lhs), rhs=rhs, rhs_terms=terms,
                       nominal_prob=nominal, holds=bool(lhs <= rhs + HOLDS_TOL),
                       epsilon=eps, varsigma=varsigma, details=details)


def _holdout_pieces(b_train, train: Dataset, test: Dataset, varpi, q_m):
    if train.p != test.p:
        raise DimensionMismatch("train and test have different column counts")
    e_t = train.y - train.X @ b_train
    e_s = test.y - test.X @ b_train
    eps = vc_epsilon(VCParams(h=train.p, n_t=train.n))
    m_bar = vc_bound(_sq(e_t) / train.n, eps)
    gap = m_bar - _sq(e_s) / test.n
    cross = 4.0 / test.n * float(np.max(np.abs(e_s @ test.X))) * float(np.abs(b_train).sum())
    varsigma = bahr_esseen_varsigma(e_s**2, q_m, varpi)
    return gap, cross, varsigma, eps


def theorem2_bound(b_train, b_lasso, train: Dataset, test: Dataset,
                   varpi: float = DEFAULT_VARPI, q_m: float = DEFAULT_MOMENT_ORDER) -> BoundReport:
    """Prediction distance between the unpenalized fit and a validation-tuned Lasso.

    ``lhs = ||X_s (b_train - b_lasso)||^2 / n_s`` and the overfit gap
    ``e_t/(1 - sqrt(eps)) - e_s`` keeps its sign.
    """
    b_train, b_lasso = _vec(b_train, train.p), _vec(b_lasso, train.p)
    gap, cross, varsigma, eps = _holdout_pieces(b_train, train, test, varpi, q_m)
    lhs = _sq(test.X @ (b_train - b_lasso)) / test.n
    return _report(THEOREM2, lhs, gap, cross, varsigma, None,
                   nominal_probability(varpi, train.n), eps, varsigma)


def _coefficient_bound(name, b_train, b_lasso, train, test, rho, varpi, q_m, **details):
    gap, cross, varsigma, eps = _holdout_pieces(b_train, train, test, varpi, q_m)
    lhs = float(np.linalg.norm(b_train - b_lasso))
    return _report(name, lhs, math.sqrt(abs(gap) / rho), math.sqrt(cross / rho),
                   math.sqrt(varsigma / rho), rho, nominal_probability(varpi, train.n),
                   eps, varsigma, **details)


def theorem3_bound(b_train, b_lasso, train: Dataset, test: Dataset,
                   varpi: float = DEFAULT_VARPI, q_m: float = DEFAULT_MOMENT_ORDER) -> BoundReport:
    """Coefficient distance when OLS exists (``n_t >= p``).

    The curvature constant is the smallest eigenvalue of the test design
    ``X_s'X_s / n_s``, which is where the strong-convexity step is applied.
    """
    b_train, b_lasso = _vec(b_train, train.p), _vec(b_lasso, train.p)
    if train.n < train.p:
        raise RankDeficient(f"n_t={train.n} < p={train.p}: no OLS comparator")
    rho = min_eigenvalue(test)
    if rho <= _EIG_FLOOR:
        raise RankDeficient("test design has a singular Gram matrix")
    return _coefficient_bound(THEOREM3, b_train, b_lasso, train, test, rho, varpi, q_m)


def theorem4_bound(b_train, b_lasso, train: Dataset, test: Dataset,
                   varpi: float = DEFAULT_VARPI, q_m: float = DEFAULT_MOMENT_ORDER,
                   s: int | None = None) -> BoundReport:
    """Coefficient distance with a restricted eigenvalue in place of the full one.

    ``s`` defaults to the size of the union of both supports (at least 1);
    the restricted eigenvalue is taken on the test design.
    """
    b_train, b_lasso = _vec(b_train, train.p), _vec(b_lasso, train.p)
    if s is None:
        s = max(1, int(np.count_nonzero((b_train != 0) | (b_lasso != 0))))
    rho = restricted_eigenvalue(test, s)
    if rho <= _EIG_FLOOR:
        raise ZeroRestrictedEigenvalue(f"restricted eigenvalue at s={s} is zero")
    return _coefficient_bound(THEOREM4, b_train, b_lasso, train, test, rho, varpi, q_m, s=int(s))


def cv_prediction_bound(selection, varpi: float = DEFAULT_VARPI, q_m: float = DEFAULT_MOMENT_ORDER,
                        mode: str = COROLLARY2, fold_fits=None) -> BoundReport:
    """Bounds for the K-fold cross-validated Lasso built on the worst fold pair.

    ``b_bar`` is the unpenalized fit of the fold pair (k*, q*) with the
    largest held-out error. Its training error on fold k*'s training part,
    its errors on every test fold and its slack on fold q* enter the bound.

    ``mode`` picks the shape: COROLLARY2 compares predictions averaged over
    the test folds; COROLLARY3 and COROLLARY4 compare squared coefficient
    distances after dividing every term by the smallest (restricted)
    eigenvalue over the test-fold designs.
    """
    from .selection import worst_fold

    if mode not in (COROLLARY2, COROLLARY3, COROLLARY4):
        raise ValueError(f"unknown mode {mode!r}")
    k_star, q_star, fit = worst_fold(selection, fold_fits)
    data, plan = selection.data, selection.plan
    b_bar = fit.coefficients
    b_lasso = selection.chosen.coefficients
    tests = [data.subset(plan.test_rows(q)) for q in range(plan.K)]
    train_k = data.subset(plan.train_rows(k_star))

    e_t = train_k.y - train_k.X @ b_bar
    eps = vc_epsilon(VCParams(h=data.p, n_t=train_k.n))
    m_bar = vc_bound(_sq(e_t) / train_k.n, eps)
    l1 = float(np.abs(b_bar).sum())
    ge, cross, pred = [], [], []
    for te in tests:
        e_s = te.y - te.X @ b_bar
        ge.append(_sq(e_s) / te.n)
        cross.append(4.0 / te.n * float(np.max(np.abs(e_s @ te.X))) * l1)
        pred.append(_sq(te.X @ (b_bar - b_lasso)) / te.n)
    e_sq = tests[q_star].y - tests[q_star].X @ b_bar
    varsigma = bahr_esseen_varsigma(e_sq**2, q_m, varpi)
    gap = abs(m_bar - float(np.mean(ge)))
    cross_mean = float(np.mean(cross))
    nominal = nominal_probability(varpi, train_k.n)
    details = {"k_star": k_star, "q_star": q_star, "K": plan.K}

    if mode == COROLLARY2:
        return _report(COROLLARY2, float(np.mean(pred)), gap, cross_mean, varsigma, None,
                       nominal, eps, varsigma, **details)
    if mode == COROLLARY3:
        rho = min(min_eigenvalue(te) for te in tests)
        if rho <= _EIG_FLOOR:
            raise RankDeficient("a test fold has a singular Gram matrix")
    else:
        s = max(1, int(np.count_nonzero((b_bar != 0) | (b_lasso != 0))))
        rho = min(restricted_eigenvalue(te, s) for te in tests)
        if rho <= _EIG_FLOOR:
            raise ZeroRestrictedEigenvalue(f"restricted eigenvalue at s={s} is zero on a test fold")
        details["s"] = s
    lhs = _sq(b_bar - b_lasso)
    return _report(mode, lhs, gap / rho, cross_mean / rho, varsigma / rho, rho,
                   nominal, eps, varsigma, **details)
