"""Monte-Carlo experiments on the equicorrelated Gaussian design.

Each replication draws a training sample of ``cfg.n`` rows and a fresh test
sample of the same size from its own random stream, tunes the Lasso by
K-fold cross-validation on the training sample and compares it with the
unpenalized comparator (OLS when the standardized training design has full
column rank, forward selection otherwise). Replications only depend on
``(cfg, replication_index)``, so any subset can be run separately and
concatenated.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds
from .data import SimulationConfig, apply_standardization, replication_rng, standardize, simulate_train_test
from .errors import RegimeMismatch, SRMError
from .metrics import empirical_risk, fit_metrics
from .selection import cv_lasso, extremum_fit, holdout_lasso, support_lambda_interval
from .solvers import fsr_fit, ols_fit

log = logging.getLogger(__name__)

LASSO_ROW = "LASSO"
COMPARATOR_ROW = "OLS_or_FSR"
METRICS = ("bias", "training_error", "generalization_error", "r2_in", "r2_out", "gr2")
N_TRUE = 6
N_WORST_ZEROS = 4

HOLDOUT_BOUNDS = (bounds.THEOREM2, bounds.THEOREM3, bounds.THEOREM4)
CV_BOUNDS = (bounds.COROLLARY2, bounds.COROLLARY3, bounds.COROLLARY4)


def _fold_seed(cfg: SimulationConfig, r: int) -> int:
    return cfg.seed ^ r


def _metric_row(m) -> dict:
    return {
        "bias": m.bias_l2,
        "training_error": m.training_error,
        "generalization_error": m.generalization_error,
        "r2_in": m.r2_train,
        "r2_out": m.r2_test,
        "gr2": m.gr2,
    }


@dataclass(frozen=True, eq=False)
class ReplicationResult:
    """Everything one replication contributes to the tables and boxplots.

    Coefficients are in the original (unstandardized) units.
    """

    index: int
    lasso: dict
    comparator: dict
    comparator_method: str
    lambda_star: float
    lasso_support: tuple
    lasso_coef: np.ndarray
    comparator_coef: np.ndarray

    def worst_zeros(self, n_true: int) -> np.ndarray:
        """Indices of the zero coefficients the comparator estimates worst (largest |b|)."""
        zeros = np.arange(n_true, self.comparator_coef.size)
        order = np.argsort(-np.abs(self.comparator_coef[zeros]), kind="stable")
        return zeros[order[:N_WORST_ZEROS]]


def run_replication(cfg: SimulationConfig, r: int) -> ReplicationResult:
    train, test, beta = simulate_train_test(cfg, r, cfg.n)
    sel = cv_lasso(train, K=cfg.K, grid=cfg.lambda_grid, seed=_fold_seed(cfg, r))
    trs, params = standardize(train)
    tes = apply_standardization(test, params)
    b_lasso = sel.chosen.coefficients
    comp = extremum_fit(trs)
    return ReplicationResult(
        index=r,
        lasso=_metric_row(fit_metrics(b_lasso, trs, tes, beta)),
        comparator=_metric_row(fit_metrics(comp.coefficients, trs, tes, beta)),
        comparator_method=comp.method,
        lambda_star=sel.lambda_star,
        lasso_support=sel.chosen.support,
        lasso_coef=trs.to_raw_coefficients(b_lasso),
        comparator_coef=trs.to_raw_coefficients(comp.coefficients),
    )


def _map(fn, args, workers: int):
    if workers <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args)))


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Aggregates and raw per-replication results for one design."""

    config: SimulationConfig
    replications: list

    @property
    def p(self) -> int:
        return self.config.p

    def raw_table(self) -> list[dict]:
        rows = []
        for rep in self.replications:
            for method, vals, name in ((LASSO_ROW, rep.lasso, "LASSO"),
                                       (COMPARATOR_ROW, rep.comparator, rep.comparator_method)):
                rows.append({"replication": rep.index, "row": method, "method": name, **vals})
        return rows

    def means(self) -> dict:
        out = {}
        for row in (LASSO_ROW, COMPARATOR_ROW):
            recs = [r for r in self.raw_table() if r["row"] == row]
            out[row] = {m: float(np.mean([r[m] for r in recs])) for m in METRICS}
        return out

    def comparator_methods(self) -> list[str]:
        return sorted({rep.comparator_method for rep in self.replications})

    def exact_support_rate(self) -> float:
        true = tuple(range(len(self.config.beta1)))
        return float(np.mean([rep.lasso_support == true for rep in self.replications]))

    def coefficient_matrix(self, which: str) -> np.ndarray:
        """Replications x 10 tracked estimates: the true nonzeros, then the 4 worst zeros."""
        k = len(self.config.beta1)
        out = []
        for rep in self.replications:
            coef = rep.lasso_coef if which == LASSO_ROW else rep.comparator_coef
            idx = np.concatenate([np.arange(k), rep.worst_zeros(k)])
            out.append(coef[idx])
        return np.array(out)

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {
                "n": cfg.n, "p": cfg.p, "beta1": list(cfg.beta1), "corr": cfg.corr,
                "noise_sd": cfg.noise_sd, "replications": len(self.replications), "seed": cfg.seed,
                "K": cfg.K, "n_test": cfg.n,
                "grid": {"mode": cfg.lambda_grid.mode, "num_points": cfg.lambda_grid.num_points,
                         "min_ratio": cfg.lambda_grid.min_ratio, "step": cfg.lambda_grid.step,
                         "include_zero": cfg.lambda_grid.include_zero},
            },
            "replication_indices": [rep.index for rep in self.replications],
            "means": self.means(),
            "comparator_methods": self.comparator_methods(),
            "exact_support_rate": self.exact_support_rate(),
            "raw": self.raw_table(),
            "lambda_star": [rep.lambda_star for rep in self.replications],
        }


def run_table1(cfg: SimulationConfig, p_list=(200, 250, 300, 500), replication_indices=None,
               workers: int = 1) -> dict[int, ExperimentReport]:
    """Lasso versus the unpenalized comparator for every ``p`` in ``p_list``."""
    reports = {}
    for p in p_list:
        c = replace(cfg, p=int(p))
        idx = range(c.replications) if replication_indices is None else replication_indices
        reps = _map(run_replication, [(c, int(r)) for r in idx], workers)
        reports[int(p)] = ExperimentReport(c, reps)
    return reports


def boxplot_table(report: ExperimentReport) -> tuple[list[str], list[list]]:
    """CSV header and rows: tracked estimates of both methods plus both GR^2 values."""
    k = len(report.config.beta1)
    labels = [f"b{j + 1}" for j in range(k)] + [f"zero{j + 1}" for j in range(N_WORST_ZEROS)]
    header = (["replication"] + [f"lasso_{s}" for s in labels] + [f"comparator_{s}" for s in labels]
              + [f"zero{j + 1}_index" for j in range(N_WORST_ZEROS)]
              + ["comparator_method", "lasso_gr2", "comparator_gr2"])
    L = report.coefficient_matrix(LASSO_ROW)
    C = report.coefficient_matrix(COMPARATOR_ROW)
    rows = []
    for i, rep in enumerate(report.replications):
        zeros = rep.worst_zeros(k)
        rows.append([rep.index] + [float(v) for v in L[i]] + [float(v) for v in C[i]]
                    + [int(z) + 1 for z in zeros]
                    + [rep.comparator_method, rep.lasso["gr2"], rep.comparator["gr2"]])
    return header, rows


def run_boxplot_data(cfg: SimulationConfig, replication_indices=None, workers: int = 1):
    """Per-replication tracked estimates and GR^2 values for one design."""
    report = run_table1(cfg, (cfg.p,), replication_indices, workers)[cfg.p]
    return boxplot_table(report)


def write_csv(header, rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# bound coverage


def check_regime(cfg: SimulationConfig, bound_name: str) -> None:
    if bound_name in HOLDOUT_BOUNDS:
        n_t = cfg.n
    elif bound_name in CV_BOUNDS:
        n_t = cfg.n - -(-cfg.n // cfg.K)  # smallest training part
    else:
        raise ValueError(f"no coverage experiment for {bound_name!r}")
    if bound_name in (bounds.THEOREM3, bounds.COROLLARY3) and n_t < cfg.p:
        raise RegimeMismatch(f"{bound_name} needs n_t >= p (n_t={n_t}, p={cfg.p})")
    if bound_name in (bounds.THEOREM4, bounds.COROLLARY4) and cfg.p <= n_t:
        raise RegimeMismatch(f"{bound_name} needs p > n_t (n_t={n_t}, p={cfg.p})")


def bound_replication(cfg: SimulationConfig, bound_name: str, r: int, varpi: float = bounds.DEFAULT_VARPI,
                      q_m: float = bounds.DEFAULT_MOMENT_ORDER, lasso_equals_train: bool = False):
    """Evaluate one bound on replication ``r``; returns ``(report or None, error name or None)``.

    ``lasso_equals_train`` replaces the Lasso fit by the comparator, which
    makes the left-hand side zero (a harness sanity check).
    """
    train, test, _ = simulate_train_test(cfg, r, cfg.n)
    try:
        if bound_name in HOLDOUT_BOUNDS:
            trs, params = standardize(train)
            tes = apply_standardization(test, params)
            # the VC term depends only on (p, n_t); skip the path fit when it is vacuous
            bounds.vc_bound(0.0, bounds.vc_epsilon(bounds.VCParams(h=trs.p, n_t=trs.n)))
            if bound_name == bounds.THEOREM3:
                b_train = ols_fit(trs).coefficients
            elif bound_name == bounds.THEOREM4:
                b_train = fsr_fit(trs).coefficients
            else:
                b_train = extremum_fit(trs).coefficients
            if lasso_equals_train:
                b_lasso = b_train
            else:
                b_lasso = holdout_lasso(trs, tes, cfg.lambda_grid).chosen.coefficients
            fn = {bounds.THEOREM2: bounds.theorem2_bound, bounds.THEOREM3: bounds.theorem3_bound,
                  bounds.THEOREM4: bounds.theorem4_bound}[bound_name]
            return fn(b_train, b_lasso, trs, tes, varpi, q_m), None
        sel = cv_lasso(train, K=cfg.K, grid=cfg.lambda_grid, seed=_fold_seed(cfg, r), extremum=True)
        if lasso_equals_train:
            from .selection import worst_fold
            _, _, fit = worst_fold(sel)
            sel = replace(sel, chosen=fit)
        return bounds.cv_prediction_bound(sel, varpi, q_m, mode=bound_name), None
    except SRMError as exc:
        return None, type(exc).__name__


@dataclass(frozen=True, eq=False)
class CoverageReport:
    """How often a bound held across replications.

    Replications where the bound could not be evaluated (for instance a VC
    term ``eps >= 1``) count as not holding; ``n_undefined`` says how many.
    """

    bound: str
    config: SimulationConfig
    varpi: float
    moment_order: float
    indices: list
    reports: list
    errors: list = field(default_factory=list)

    @property
    def replications(self) -> int:
        return len(self.indices)

    @property
    def n_holds(self) -> int:
        return sum(1 for rep in self.reports if rep is not None and rep.holds)

    @property
    def n_undefined(self) -> int:
        return sum(1 for rep in self.reports if rep is None)

    @property
    def holds_fraction(self) -> float:
        return self.n_holds / self.replications

    @property
    def nominal_prob(self) -> float:
        defined = [rep.nominal_prob for rep in self.reports if rep is not None]
        if defined:
            return float(np.min(defined))
        n_t = self.config.n if self.bound in HOLDOUT_BOUNDS else self.config.n - -(-self.config.n // self.config.K)
        return bounds.nominal_probability(self.varpi, n_t)

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "n": self.config.n,
            "p": self.config.p,
            "K": self.config.K if self.bound in CV_BOUNDS else None,
            "seed": self.config.seed,
            "varpi": self.varpi,
            "moment_order": self.moment_order,
            "replications": self.replications,
            "n_holds": self.n_holds,
            "n_undefined": self.n_undefined,
            "holds_fraction": self.holds_fraction,
            "nominal_prob": self.nominal_prob,
            "varsigma_plug_in": True,
            "per_replication": [
                {"replication": i, "error": err, **({} if rep is None else
                 {"lhs": rep.lhs, "rhs": rep.rhs, "holds": rep.holds, "epsilon": rep.epsilon,
                  "rhs_terms": rep.rhs_terms})}
                for i, rep, err in zip(self.indices, self.reports, self.errors)
            ],
        }


def run_bound_coverage(cfg: SimulationConfig, bound_name: str, replications: int | None = None,
                       varpi: float = bounds.DEFAULT_VARPI, q_m: float = bounds.DEFAULT_MOMENT_ORDER,
                       workers: int = 1, lasso_equals_train: bool = False) -> CoverageReport:
    check_regime(cfg, bound_name)
    reps = cfg.replications if replications is None else replications
    idx = list(range(reps))
    out = _map(bound_replication,
               [(cfg, bound_name, r, varpi, q_m, lasso_equals_train) for r in idx], workers)
    return CoverageReport(bound=bound_name, config=cfg, varpi=varpi, moment_order=q_m, indices=idx,
                          reports=[o[0] for o in out], errors=[o[1] for o in out])


# ---------------------------------------------------------------------------
# desk checks of the population-level claims


def true_model_risk_check(cfg: SimulationConfig, n_test: int = 100_000, n_perturb: int = 100,
                          radius: float = 0.5) -> float:
    """Fraction of random perturbations ``beta + delta`` (``||delta|| = radius``)
    whose empirical risk on a large fresh sample exceeds that of ``beta``."""
    big = replace(cfg, n=n_test)
    data, beta = _simulate(big)
    rng = replication_rng(cfg.seed, 0x5EED)
    base = empirical_risk(beta, data)
    wins = 0
    for _ in range(n_perturb):
        d = rng.standard_normal(cfg.p)
        d *= radius / np.linalg.norm(d)
        wins += base < empirical_risk(beta + d, data)
    return wins / n_perturb


def _simulate(cfg):
    train, _, beta = simulate_train_test(cfg, 0, 0)
    return train, beta


def exact_support_reachable(cfg: SimulationConfig, replication_indices=None) -> list[bool]:
    """Per replication: does some penalty give a Lasso fit with exactly the true support?"""
    idx = range(cfg.replications) if replication_indices is None else replication_indices
    true = range(len(cfg.beta1))
    out = []
    for r in idx:
        train, _, _ = simulate_train_test(cfg, int(r), 0)
        out.append(support_lambda_interval(standardize(train)[0], true) is not None)
    return out
