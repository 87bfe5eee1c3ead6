import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import tatraj

DATA = Path(os.environ.get("TATRAJ_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_special_functions():
    assert tatraj.log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
    assert tatraj.digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-12)
    with pytest.raises(ValueError):
        tatraj.log_gamma(-1.0)


def test_density():
    assert tatraj.dirichlet_log_density([0.2, 0.3, 0.5], [1, 1, 1]) == pytest.approx(math.log(2.0))


def test_markov_round_trip():
    diaries = [[1] * 40 + [4] * 56 for _ in range(20)]
    model = tatraj.estimate_transitions(diaries, kappa=0.0)
    assert len(model.matrices) == 95
    exact = tatraj.analytic_profile(model)
    sim = tatraj.simulate_profile(model, 500, seed=3)
    assert sim.shape == (96, 8)
    np.testing.assert_allclose(sim.sum(axis=1), 1.0, atol=1e-12)
    assert np.abs(sim - exact).max() < 1e-3


def test_regression_recovers_intercepts():
    rng = np.random.default_rng(0)
    n = 400
    s = rng.uniform(-1, 1, n)
    X = np.column_stack([np.ones(n), s * s, rng.normal(size=n)])
    beta = np.array([[1.0, 0.5, 0.2], [1.5, -0.5, 0.0], [0.5, 0.0, -0.3]])
    alpha = np.exp(X @ beta.T)
    Y = np.array([rng.dirichlet(a) for a in alpha])
    fit = tatraj.fit_regression(X, Y)
    assert fit["converged"]
    assert fit["aic"] == 2 * fit["n_params"] - 2 * fit["loglik"]
    assert np.all(np.abs(fit["beta"] - beta) <= 4 * fit["std_error"])


def test_stats_helpers():
    t, df, p = tatraj.welch_t_test([0.1, 0.2, 0.3], [0.4, 0.5, 0.6])
    assert t == pytest.approx(-3.674, abs=1e-3)
    assert p == pytest.approx(0.0214, abs=5e-4)
    a = np.random.default_rng(1).normal(size=(8, 96))
    assert tatraj.boxs_m_test(a, a)["df"] == 4656
    xy = tatraj.ternary_coordinates(np.array([[0, 0.43, 0, 0, 0.35, 0, 0.22, 0]]))
    assert 0 < xy[0, 1] < math.sqrt(3) / 2
    r = tatraj.kmeans(np.array([[0.0, 0], [0, 1], [10, 10], [10, 11]]), 2, seed=1)
    assert r["inertia"] == pytest.approx(1.0)


def test_pipeline(tmp_path):
    report = tatraj.run_all(DATA / "pipeline.ini", tmp_path / "out")
    assert report["fit"]["converged"]
    assert report["selection"]["kept"][0] == "Time^2"
    on_disk = json.loads((tmp_path / "out" / "run_report.json").read_text())
    assert on_disk["config_hash"] == report["config_hash"]


def test_synthesize(tmp_path):
    tatraj.synthesize(tmp_path, n=2, seed=1)
    assert (tmp_path / "truth.json").exists()
    assert (tmp_path / "diaries.csv").read_text().startswith("person_id,")
