import dataclasses

import numpy as np
import pytest

from mcid_hub.core.exceptions import BadParameterError, BadSplitSizeError
from mcid_hub.core.models import Dataset, make_rng
from mcid_hub.core.utils import standard_error
from mcid_hub.simulation.config import SimulationConfig
from mcid_hub.simulation.runner import (
    consistency_trend,
    delta_sensitivity,
    mce,
    replication_seeds,
    run_dataset_comparison,
    run_replications,
)

FAST = SimulationConfig(n_test=200, lam=0.1)


def _without_runtime(report):
    return [dataclasses.replace(r, runtime=0.0) for r in report.results]


def test_replication_seeds_are_stable_and_distinct():
    seeds = replication_seeds(7, 20)
    assert seeds == replication_seeds(7, 20)
    assert len(set(seeds)) == 20
    assert replication_seeds(7, 5) == seeds[:5]


def test_mce_of_constant_threshold(toy):
    assert mce(0.5, toy) == 0.0
    assert mce(1.5, toy) == pytest.approx(1 / 3)


def test_population_replications():
    report = run_replications("pop1", "population", 200, reps=4, base_seed=1, config=FAST)
    assert report.reps == 4 and report.failures == 0
    summary = report.summary()
    assert summary["mean_c_hat"] == pytest.approx(0.0, abs=0.4)
    assert summary["mean_ideal_mce"] == pytest.approx(0.25, abs=0.08)
    assert summary["mean_mce"] >= 0.0
    assert len(report.as_dict()["replications"]) == 4


def test_personalized_replications_with_fixed_lambda():
    report = run_replications("pers1", "personalized-linear", 60, reps=2, base_seed=3, config=FAST)
    assert report.failures == 0
    assert all(r.lam == 0.1 for r in report.results)
    assert all(r.outer_iters is not None for r in report.results)
    assert report.mean("estimation_error") is not None
    assert "mean_c_hat" not in report.summary()


def test_processes_give_same_results_as_serial():
    serial = run_replications("pers1", "personalized-gaussian", 40, reps=3, base_seed=5, config=FAST)
    parallel = run_replications("pers1", "personalized-gaussian", 40, reps=3, base_seed=5, config=FAST, threads=2)
    assert _without_runtime(serial) == _without_runtime(parallel)


def test_failed_replications_are_recorded():
    config = SimulationConfig(n_test=50, folds=5, lambdas=(1.0,))
    report = run_replications("pers1", "personalized-linear", 6, reps=2, config=config)
    assert report.failures == 2
    assert all(r.error.startswith("DegenerateFoldError") for r in report.results)
    assert report.mean("test_mce") is None


def test_run_argument_errors():
    with pytest.raises(BadParameterError):
        run_replications("pop1", "personalized-linear", 50, reps=1, config=FAST)
    with pytest.raises(BadParameterError):
        run_replications("pop1", "population", 50, reps=0, config=FAST)
    with pytest.raises(BadParameterError):
        run_replications("pop1", "svm", 50, reps=1, config=FAST)


def test_dataset_comparison_without_covariates():
    rng = make_rng(8)
    x = rng.uniform(-1, 1, 80)
    data = Dataset(x, np.where(x > 0, 1, -1))
    reports = run_dataset_comparison(data, 60, reps=3, config=FAST)
    assert [r.method for r in reports] == ["population"]
    assert reports[0].n_test == 20
    assert reports[0].mean("ideal_mce") is None
    with pytest.raises(BadSplitSizeError):
        run_dataset_comparison(data, 80, reps=1, config=FAST)


def test_dataset_comparison_with_covariates(pers1_train):
    reports = run_dataset_comparison(pers1_train, 45, reps=2, config=FAST)
    assert [r.method for r in reports] == ["population", "personalized-linear", "personalized-gaussian"]
    assert all(r.failures == 0 for r in reports)


def test_delta_sensitivity_rows():
    rows = delta_sensitivity("pers1", 60, deltas=(0.05, 0.5), seed=2, config=FAST)
    assert [r.delta for r in rows] == [0.05, 0.5]
    assert all(len(r.coefficients) == 2 for r in rows)
    with pytest.raises(BadParameterError):
        delta_sensitivity("pers1", 60, deltas=(), config=FAST)
    with pytest.raises(BadParameterError):
        delta_sensitivity("pers1", 60, config=FAST, method="population")


def test_consistency_trend_rows():
    rows = consistency_trend("pop1", sizes=(50, 400), reps=3, config=FAST)
    assert [r.n_train for r in rows] == [50, 400]
    assert all(r.reps_ok == 3 for r in rows)
    assert all(r.median_error is not None for r in rows)


def test_numeric_errors_count_as_failures(monkeypatch):
    def singular(*args, **kwargs):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr("mcid_hub.simulation.runner.fit_method", singular)
    report = run_replications("pop1", "population", 50, reps=2, config=FAST)
    assert report.failures == 2
    assert all(r.error.startswith("LinAlgError") for r in report.results)


@pytest.mark.parametrize("scenario", ["pop1", "pop2", "pop3"])
def test_estimates_do_not_beat_ideal_mce(scenario):
    report = run_replications(scenario, "population", 200, reps=20, base_seed=4, config=SimulationConfig(n_test=1000))
    gaps = np.array([r.test_mce - r.ideal_mce for r in report.results])
    assert gaps.mean() >= -2 * standard_error(gaps)
