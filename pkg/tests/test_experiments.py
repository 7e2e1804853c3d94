import numpy as np
import pytest

from srmlasso import bounds
from srmlasso.data import SimulationConfig
from srmlasso.errors import RegimeMismatch
from srmlasso.experiments import (
    COMPARATOR_ROW,
    LASSO_ROW,
    METRICS,
    boxplot_table,
    run_bound_coverage,
    run_replication,
    run_table1,
)

CFG = SimulationConfig(n=120, p=30, replications=4, seed=3, K=5)


@pytest.fixture(scope="module")
def report():
    return run_table1(CFG, (30,))[30]


def test_means_recompute_from_raw(report):
    raw = report.raw_table()
    assert len(raw) == 2 * 4
    for row in (LASSO_ROW, COMPARATOR_ROW):
        for m in METRICS:
            vals = [r[m] for r in raw if r["row"] == row]
            assert report.means()[row][m] == pytest.approx(np.mean(vals), abs=1e-10)


def test_report_dict(report):
    d = report.to_dict()
    assert set(d["means"]) == {LASSO_ROW, COMPARATOR_ROW}
    assert d["config"]["n_test"] == 120 and d["comparator_methods"] == ["OLS"]
    assert d["replication_indices"] == [0, 1, 2, 3]


def test_replications_are_independent(report):
    split = run_table1(CFG, (30,), replication_indices=[2, 3])[30]
    assert split.raw_table() == report.raw_table()[4:]


def test_single_replication_matches_table(report):
    rep = run_replication(CFG, 1)
    assert rep.lasso == report.replications[1].lasso


def test_comparator_switches_to_fsr_when_wide():
    rep = run_replication(SimulationConfig(n=60, p=60, K=5, seed=1), 0)
    assert rep.comparator_method == "FSR"


def test_boxplot_schema(report):
    header, rows = boxplot_table(report)
    coef_cols = [h for h in header if h.startswith(("lasso_b", "lasso_zero", "comparator_b", "comparator_zero"))]
    assert len(coef_cols) == 20
    assert len(rows) == 4 and all(len(r) == len(header) for r in rows)
    gr2 = [r[header.index("lasso_gr2")] for r in rows]
    assert len(gr2) == report.config.replications
    zi = header.index("zero1_index")
    for rep, row in zip(report.replications, rows):
        worst = rep.worst_zeros(6)
        assert np.all(worst >= 6)
        # worst zeros are the largest comparator estimates among the true zeros
        tail = np.abs(rep.comparator_coef[6:])
        assert np.abs(rep.comparator_coef[worst]).min() >= np.sort(tail)[-4] - 1e-15
        assert row[zi] == worst[0] + 1


@pytest.mark.slow
def test_lasso_zero_estimates_have_zero_median():
    rep = run_table1(SimulationConfig(p=200, replications=20, seed=7), (200,))[200]
    L = rep.coefficient_matrix(LASSO_ROW)
    assert np.all(np.median(L[:, 6:], axis=0) == 0.0)


def test_coverage_regime_checks():
    with pytest.raises(RegimeMismatch):
        run_bound_coverage(SimulationConfig(n=250, p=500), bounds.THEOREM3, 1)
    with pytest.raises(RegimeMismatch):
        run_bound_coverage(SimulationConfig(n=250, p=50), bounds.THEOREM4, 1)
    with pytest.raises(RegimeMismatch):
        run_bound_coverage(SimulationConfig(n=250, p=240, K=10), bounds.COROLLARY3, 1)


def test_coverage_with_identical_fits_always_holds():
    rep = run_bound_coverage(SimulationConfig(n=150, p=20, seed=2), bounds.THEOREM2, 10,
                             lasso_equals_train=True)
    assert rep.n_undefined == 0 and rep.holds_fraction == 1.0
    assert all(r.lhs == 0.0 for r in rep.reports)


def test_coverage_counts_undefined_as_failures():
    rep = run_bound_coverage(SimulationConfig(n=250, p=200, seed=0), bounds.THEOREM2, 2)
    assert rep.n_undefined == 2 and rep.holds_fraction == 0.0
    assert rep.to_dict()["per_replication"][0]["error"] == "EpsilonTooLarge"


def test_coverage_report_fields():
    rep = run_bound_coverage(SimulationConfig(n=200, p=10, seed=1, K=4), bounds.COROLLARY2, 3)
    d = rep.to_dict()
    assert d["replications"] == 3 and d["K"] == 4
    assert d["nominal_prob"] == pytest.approx(0.9 * (1 - 1 / 150))
    assert 0.0 <= d["holds_fraction"] <= 1.0
