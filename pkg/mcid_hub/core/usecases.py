from mcid_hub.core.kernels import KernelSpec
from mcid_hub.core.model_selection import CvPlan, cross_validate
from mcid_hub.core.models import validate
from mcid_hub.core.personalized import DcaConfig, dca_fit
from mcid_hub.core.population import fit_neyman_pearson, fit_population, fit_weighted, inconsistency_table
from mcid_hub.core.utils import misclassification_error, sign
from mcid_hub.decorators import log_action
from mcid_hub.infra.database import DatabaseManager
from mcid_hub.simulation.config import SimulationConfig
from mcid_hub.simulation.runner import (
    consistency_trend,
    delta_sensitivity,
    run_dataset_comparison,
    run_replications,
)
from mcid_hub.simulation.storage import ReportStorage

db = DatabaseManager()


@log_action("FIT_POPULATION", fields=("zero_one_labels",))
def fit_population_file(path, *, zero_one_labels: bool = False) -> dict:
    """Популяционный MCID по CSV"""
    return fit_population(db.read_dataset(path, zero_one_labels)).as_dict()


@log_action("FIT_WEIGHTED", fields=("w",))
def fit_weighted_file(path, *, w: float, zero_one_labels: bool = False) -> dict:
    return fit_weighted(db.read_dataset(path, zero_one_labels), w).as_dict()


@log_action("FIT_NP", fields=("alpha",))
def fit_np_file(path, *, alpha: float, zero_one_labels: bool = False) -> dict:
    return fit_neyman_pearson(db.read_dataset(path, zero_one_labels), alpha).as_dict()


@log_action("FIT_PERSONALIZED", fields=("kernel", "delta", "lam", "seed", "model_out"), verbose=True)
def fit_personalized_file(path, *, kernel: str, sigma2: float | None = None, delta: float, lam: float | None,
                          folds: int, seed: int, model_out=None, bandwidth_rule: str = "median",
                          zero_one_labels: bool = False, threads: int = 1) -> dict:
    """Персонализированный MCID; lam=None означает выбор кросс-валидацией"""
    train = db.read_dataset(path, zero_one_labels)
    spec = KernelSpec.linear() if kernel == "linear" else KernelSpec.gaussian(sigma2, bandwidth_rule)
    spec = spec.resolve(train.z)
    config = DcaConfig()
    result: dict = {}
    if lam is None:
        cv = cross_validate(train, spec, delta, CvPlan(folds, seed=seed), config, threads)
        lam = cv.best_lambda
        result.update(cv.as_dict())
    model = dca_fit(train, spec, delta, lam, config)
    if model_out is not None:
        db.save_model(model_out, model)
    beta = model.linear_coefficients()
    result.update({
        "b": model.b,
        "lam": model.lam,
        "delta": model.delta,
        "kernel": model.kernel.as_dict(),
        "n_samples": len(train),
        "outer_iters": model.n_outer_iters,
        "converged": model.converged,
        "objective": model.trace[-1],
        "train_mce": misclassification_error(train.x, train.y, model.fitted()),
        "linear_coefficients": None if beta is None else beta.tolist(),
        "model_path": None if model_out is None else str(model_out),
    })
    return result


@log_action("PREDICT", fields=("model_path",))
def predict_file(path, *, model_path) -> dict:
    """c(z) для каждой строки; при наличии x также классификация sign(x - c(z))"""
    model = db.load_model(model_path)
    z, x = db.read_covariates(path)
    thresholds = model.predict(z)
    rows = []
    for i, c in enumerate(thresholds):
        row = {"row": i + 1, "c_hat": float(c)}
        if x is not None:
            row["x"] = float(x[i])
            row["predicted"] = int(sign(x[i] - c))
        rows.append(row)
    return {"predictions": rows}


@log_action("SIMULATE", fields=("scenario", "method", "n_train", "reps", "seed"))
def simulate(*, scenario: str, method: str, n_train: int, reps: int, seed: int,
             config: SimulationConfig, threads: int = 1) -> dict:
    report = run_replications(scenario, method, n_train, reps, seed, config, threads)
    data = report.as_dict()
    ReportStorage(config.history_path).record_run("simulate", report.summary() | {"base_seed": seed})
    return data


@log_action("SENSITIVITY_DELTA", fields=("scenario", "n_train", "seed"))
def sensitivity_delta(*, scenario: str, n_train: int, seed: int, config: SimulationConfig,
                      method: str = "personalized-linear", deltas: tuple[float, ...] | None = None) -> dict:
    rows = delta_sensitivity(scenario, n_train, deltas, seed, config, method)
    return {"rows": [
        {
            "delta": r.delta,
            "lambda": r.lam,
            "b": r.b,
            **({f"beta{j + 1}": v for j, v in enumerate(r.coefficients)} if r.coefficients else {}),
            "test_mce": r.test_mce,
            "estimation_error": r.estimation_error,
        }
        for r in rows
    ]}


@log_action("DEMO_INCONSISTENCY")
def demo_inconsistency(*, deltas: tuple[float, ...] = (0.01,)) -> dict:
    return {"rows": [
        {"loss": r.loss, "minimizer": r.minimizer, "c_star": r.c_star, "gap": r.gap}
        for r in inconsistency_table(deltas=deltas)
    ]}


@log_action("COMPARE", fields=("n_train", "reps", "seed"))
def compare_file(path, *, n_train: int, reps: int, seed: int, config: SimulationConfig,
                 threads: int = 1, zero_one_labels: bool = False) -> dict:
    """Сравнение методов на случайных разбиениях набора из CSV"""
    dataset = db.read_dataset(path, zero_one_labels)
    reports = run_dataset_comparison(dataset, n_train, reps, seed, config, threads)
    storage = ReportStorage(config.history_path)
    for report in reports:
        storage.record_run("compare", report.summary() | {"base_seed": seed})
    return {"rows": [r.summary() for r in reports]}


@log_action("TREND", fields=("scenario", "reps", "seed"))
def trend(*, scenario: str, sizes: tuple[int, ...] | None, reps: int, seed: int, config: SimulationConfig,
          method: str = "population", threads: int = 1) -> dict:
    rows = consistency_trend(scenario, sizes, reps, seed, config, method, threads)
    return {"rows": [
        {"n_train": r.n_train, "median_error": r.median_error, "mean_mce": r.mean_mce, "reps_ok": r.reps_ok}
        for r in rows
    ]}


@log_action("VALIDATE")
def validate_file(path, *, zero_one_labels: bool = False) -> dict:
    return validate(db.read_dataset(path, zero_one_labels, check=False)).as_dict()
