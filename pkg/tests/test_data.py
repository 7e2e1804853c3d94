import math

import numpy as np
import pytest

from srmlasso.data import (
    Dataset,
    SimulationConfig,
    StandardizationParams,
    apply_standardization,
    kfold_plan,
    load_csv,
    save_csv,
    save_json,
    simulate_dgp,
    simulate_train_test,
    split_validation,
    standardize,
)
from srmlasso.errors import (
    AlreadyStandardized,
    BadK,
    ConstantColumn,
    DegenerateSplit,
    DimensionMismatch,
    EmptyData,
    ParseError,
)


def _toy():
    X = np.array([[1.0, 0.0], [2.0, 5.0], [3.0, 1.0]])
    return Dataset(np.array([1.0, 0.0, 2.0]), X)


def test_standardize_hand_computed_column():
    d, params = standardize(_toy())
    s = math.sqrt(1.5)
    np.testing.assert_allclose(d.X[:, 0], [-s, 0.0, s], rtol=0, atol=1e-14)
    assert params.col_means[0] == 2.0
    assert params.col_scales[0] == pytest.approx(math.sqrt(2 / 3), rel=1e-15)


def test_standardize_meets_invariants(rng):
    X = rng.normal(3.0, 2.5, size=(40, 5))
    y = X @ np.arange(5) + rng.standard_normal(40)
    d, _ = standardize(Dataset(y, X))
    assert d.standardized
    np.testing.assert_allclose(d.X.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose((d.X**2).mean(axis=0), 1, atol=1e-10)
    assert abs(d.y.mean()) < 1e-10 and abs((d.y**2).mean() - 1) < 1e-10


def test_standardize_leaves_standardized_values_alone(rng):
    d, _ = standardize(Dataset(rng.standard_normal(30), rng.standard_normal((30, 3))))
    again, params = standardize(Dataset(d.y, d.X))
    np.testing.assert_allclose(again.X, d.X, atol=1e-12)
    np.testing.assert_allclose(params.col_means, 0, atol=1e-12)
    np.testing.assert_allclose(params.col_scales, 1, atol=1e-12)


def test_standardize_rejects_constant_column_and_flagged_data():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]])
    with pytest.raises(ConstantColumn) as exc:
        standardize(Dataset(np.array([1.0, 2.0, 0.0]), X))
    assert exc.value.column == 1
    with pytest.raises(ConstantColumn):
        standardize(Dataset(np.ones(3), X[:, :1]))
    d, _ = standardize(_toy())
    with pytest.raises(AlreadyStandardized):
        standardize(d)


def test_empty_dataset():
    with pytest.raises(EmptyData):
        Dataset(np.zeros(0), np.zeros((0, 2)))
    with pytest.raises(DimensionMismatch):
        Dataset(np.zeros(3), np.zeros((2, 2)))


def test_apply_standardization_uses_given_statistics():
    params = StandardizationParams(np.array([2.0]), np.array([1.0]), 0.0, 1.0)
    out = apply_standardization(Dataset(np.array([0.0]), np.array([[3.0]])), params)
    assert out.X[0, 0] == 1.0


def test_apply_identity_params_is_noop(rng):
    d = Dataset(rng.standard_normal(8), rng.standard_normal((8, 3)))
    out = apply_standardization(d, StandardizationParams.identity(3))
    np.testing.assert_array_equal(out.X, d.X)
    np.testing.assert_array_equal(out.y, d.y)


def test_test_set_keeps_its_offset_after_training_standardization(rng):
    train = Dataset(rng.standard_normal(50), rng.normal(0.0, 1.0, (50, 2)))
    test = Dataset(rng.standard_normal(50), rng.normal(4.0, 1.0, (50, 2)))
    _, params = standardize(train)
    out = apply_standardization(test, params)
    assert np.all(np.abs(out.X.mean(axis=0)) > 1e-10)


def test_apply_standardization_dimension_check():
    _, params = standardize(_toy())
    with pytest.raises(DimensionMismatch):
        apply_standardization(Dataset(np.zeros(2), np.zeros((2, 3))), params)


def _rows(d):
    return set(d.y.tolist())


def test_split_counts_and_partition():
    d = Dataset(np.arange(10.0), np.arange(20.0).reshape(10, 2))
    tr, te = split_validation(d, 0.8, seed=3)
    assert (tr.n, te.n) == (8, 2)
    assert _rows(tr) | _rows(te) == set(range(10)) and not _rows(tr) & _rows(te)
    tr2, _ = split_validation(d, 0.8, seed=3)
    np.testing.assert_array_equal(tr.y, tr2.y)


def test_split_floor_rule_and_degenerate():
    d = Dataset(np.arange(10.0), np.ones((10, 1)))
    tr, te = split_validation(d, 0.99, seed=0)
    assert (tr.n, te.n) == (9, 1)
    with pytest.raises(DegenerateSplit):
        split_validation(d, 0.05, seed=0)


@pytest.mark.parametrize("n,K,sizes", [(10, 5, [2] * 5), (10, 3, [3, 3, 4]), (7, 7, [1] * 7)])
def test_kfold_sizes(n, K, sizes):
    plan = kfold_plan(n, K, seed=1)
    assert sorted(plan.sizes().tolist()) == sorted(sizes)
    assert plan.sizes().sum() == n


def test_kfold_deterministic_and_bad_k():
    a = kfold_plan(50, 10, 4).assignment
    assert a.tobytes() == kfold_plan(50, 10, 4).assignment.tobytes()
    assert a.tobytes() != kfold_plan(50, 10, 5).assignment.tobytes()
    for K in (1, 51):
        with pytest.raises(BadK):
            kfold_plan(50, K, 0)


def test_simulated_independent_columns():
    d, _ = simulate_dgp(SimulationConfig(n=2000, p=6, corr=0.0, seed=2))
    c = np.corrcoef(d.X[:, 0], d.X[:, 1])[0, 1]
    assert abs(c) < 4 / math.sqrt(2000)


def test_simulated_moments_large_sample():
    d, _ = simulate_dgp(SimulationConfig(n=10_000, p=8, corr=0.9, seed=5))
    C = np.corrcoef(d.X.T)
    off = C[~np.eye(8, dtype=bool)]
    assert np.all(np.abs(off - 0.9) < 0.02)
    assert np.all(np.abs(d.X.mean(axis=0)) < 0.05)
    assert np.all(np.abs(d.X.var(axis=0) - 1) < 0.05)


def test_zero_noise_and_determinism():
    cfg = SimulationConfig(n=30, p=8, noise_sd=0.0, seed=9)
    d, beta = simulate_dgp(cfg, 3)
    np.testing.assert_array_equal(d.y, d.X @ beta)
    np.testing.assert_array_equal(beta[:6], [2, 4, 6, 8, 10, 12])
    d2, _ = simulate_dgp(cfg, 3)
    assert d.X.tobytes() == d2.X.tobytes()
    train, test, _ = simulate_train_test(cfg, 3, 10)
    np.testing.assert_array_equal(train.X, d.X)
    assert test.n == 10


def test_replication_streams_differ():
    cfg = SimulationConfig(n=20, p=6, seed=1)
    assert not np.array_equal(simulate_dgp(cfg, 0)[0].X, simulate_dgp(cfg, 1)[0].X)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(p=3)
    with pytest.raises(ValueError):
        SimulationConfig(corr=1.0)
    with pytest.raises(ValueError):
        SimulationConfig(replications=0)


def test_csv_round_trip(tmp_path):
    d, _ = simulate_dgp(SimulationConfig(n=25, p=7, seed=4))
    path = tmp_path / "d.csv"
    save_csv(d, path)
    assert path.read_text().splitlines()[0] == "y,x1,x2,x3,x4,x5,x6,x7"
    back = load_csv(path)
    assert np.max(np.abs(back.X - d.X)) < 1e-12 and np.max(np.abs(back.y - d.y)) < 1e-12


def test_csv_shape_and_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("y,x1\n1,2\n3,4\n5,6\n")
    d = load_csv(p)
    assert (d.n, d.p) == (3, 1)
    p.write_text("y,x1\n1,2\n3,abc\n")
    with pytest.raises(ParseError) as exc:
        load_csv(p)
    assert (exc.value.line, exc.value.column) == (3, 2)
    p.write_text("y,x1\n1,2\n3\n")
    with pytest.raises(DimensionMismatch):
        load_csv(p)


def test_save_json_handles_arrays_and_nonfinite(tmp_path):
    path = tmp_path / "r.json"
    save_json({"b": np.array([1.0, np.inf]), "k": np.int64(3)}, path)
    assert path.read_text() == '{\n  "b": [\n    1.0,\n    null\n  ],\n  "k": 3\n}\n'
