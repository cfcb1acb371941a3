import math

import numpy as np
import pytest

import rlsvi_lab


def test_chain_value_and_bound():
    assert rlsvi_lab.chain_optimal_value(10) == 1.0
    expected = (2**5 - 1) * (1 - (1 - 2**-5) ** (60 / 6))
    assert rlsvi_lab.chain_regret_lower_bound(6, 60, 6) == pytest.approx(expected, rel=1e-12)


def test_ridge_posterior_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(20, 3))
    b = rng.normal(size=20)
    mean, cov = rlsvi_lab.ridge_posterior(a, b, 0.5, 2.0)
    precision = a.T @ a / 0.25 + 2.0 * np.eye(3)
    np.testing.assert_allclose(cov, np.linalg.inv(precision), atol=1e-12)
    np.testing.assert_allclose(mean, np.linalg.solve(precision, a.T @ b / 0.25), atol=1e-12)


def test_small_chain_study_is_reproducible():
    overrides = {"N": 5, "K": 4, "runs": 2, "episodes": 10, "algo": ["rlsvi"]}
    first = rlsvi_lab.run_study("chain-coherent", overrides)
    second = rlsvi_lab.run_study("chain-coherent", overrides)
    rec = first["records"]
    assert len(rec["episode"]) == 20
    assert rec == second["records"]
    assert first["manifest"]["config"]["N"] == 5
    for run in (0, 1):
        regrets = [r for r, i in zip(rec["regret"], rec["run_id"]) if i == run]
        cums = [c for c, i in zip(rec["cum_regret"], rec["run_id"]) if i == run]
        assert np.allclose(np.cumsum(regrets), cums, atol=1e-9)


def test_config_errors_raise():
    with pytest.raises(ValueError):
        rlsvi_lab.run_study("chain-coherent", {"N": 1})
    with pytest.raises(ValueError):
        rlsvi_lab.default_config("nope")


def test_optimism_helpers():
    assert rlsvi_lab.beta_projection([0.2, 0.9], [3.0, 5.0]) == pytest.approx((5.0, 3.0))
    assert rlsvi_lab.beta_cdf(0.3, 1.0, 1.0) == pytest.approx(0.3)
    assert rlsvi_lab.single_crossing_count(2.0, 5.0) <= 1
    assert rlsvi_lab.gaussian_tail_crossover() < math.sqrt(4 * math.log(2))
    assert rlsvi_lab.normal_hazard(2.0) == pytest.approx(2.373216, rel=1e-6)


def test_optimism_suite_rows():
    rows = rlsvi_lab.run_optimism_suite(seed=2, n_mc=10000)
    assert len(rows) > 100
    assert {"check", "case", "statistic", "threshold", "pass"} <= set(rows[0])
