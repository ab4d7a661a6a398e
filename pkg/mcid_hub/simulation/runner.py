import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from mcid_hub.core.exceptions import BadParameterError, BadSplitSizeError, EmptyDatasetError, McidError
from mcid_hub.core.model_selection import fit_with_cv
from mcid_hub.core.models import Dataset, PersonalizedModel, ThresholdFit
from mcid_hub.core.personalized import dca_fit
from mcid_hub.core.population import fit_population
from mcid_hub.core.utils import misclassification_error, standard_error
from mcid_hub.logging_config import simulation_logger
from mcid_hub.simulation.config import METHODS, SimulationConfig
from mcid_hub.simulation.scenarios import BaseScenario, EmpiricalSplitSource, get_scenario

logger = simulation_logger


def mce(model: ThresholdFit | PersonalizedModel | float, test: Dataset) -> float:
    """Доля ошибок sign(x - c(z)) != y на тестовой выборке"""
    if len(test) == 0:
        raise EmptyDatasetError("Тестовая выборка пуста.")
    return misclassification_error(test.x, test.y, _thresholds(model, test))


def _thresholds(model, test: Dataset) -> np.ndarray:
    if isinstance(model, PersonalizedModel):
        return model.predict(test.z)
    if isinstance(model, ThresholdFit):
        return np.full(len(test), model.c_hat)
    return np.full(len(test), float(model))


def replication_seeds(base_seed: int, reps: int) -> list[int]:
    """Независимые seed повторов, выведенные из base_seed"""
    return [int(s) for s in np.random.SeedSequence(int(base_seed)).generate_state(reps)]


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    seed: int
    c_hat: float | None = None
    test_mce: float | None = None
    ideal_mce: float | None = None
    estimation_error: float | None = None
    lam: float | None = None
    outer_iters: int | None = None
    runtime: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class _ReplicationTask:
    source: BaseScenario | EmpiricalSplitSource
    method: str
    n_train: int
    n_test: int
    rep: int
    seed: int
    config: SimulationConfig


def fit_method(method: str, train: Dataset, config: SimulationConfig, seed: int,
               delta: float | None = None) -> tuple[ThresholdFit | PersonalizedModel, float | None]:
    """Обучение выбранным методом; возвращает модель и выбранное lambda"""
    kernel = config.kernel_for(method)
    if kernel is None:
        return fit_population(train), None
    delta = config.delta if delta is None else delta
    if config.lam is not None:
        return dca_fit(train, kernel, delta, config.lam, config.dca), config.lam
    model, cv = fit_with_cv(train, kernel, delta, config.cv_plan(seed), config.dca)
    return model, cv.best_lambda


# ошибки одного повтора, которые не прерывают весь прогон
REPLICATION_ERRORS = (McidError, ValueError, ArithmeticError, np.linalg.LinAlgError)


def _replicate(task: _ReplicationTask) -> ReplicationResult:
    started = time.perf_counter()
    try:
        train, test = task.source.draw(task.n_train, task.n_test, task.seed)
        model, lam = fit_method(task.method, train, task.config, task.seed)
        predicted = _thresholds(model, test)
        truth = task.source.ideal_threshold(test.z)
        result = ReplicationResult(
            rep=task.rep,
            seed=task.seed,
            c_hat=model.c_hat if isinstance(model, ThresholdFit) else None,
            test_mce=misclassification_error(test.x, test.y, predicted),
            ideal_mce=None if truth is None else misclassification_error(test.x, test.y, truth),
            estimation_error=None if truth is None else float(np.mean(np.abs(predicted - truth))),
            lam=lam,
            outer_iters=model.n_outer_iters if isinstance(model, PersonalizedModel) else None,
            runtime=time.perf_counter() - started,
        )
    except REPLICATION_ERRORS as e:
        logger.error(f"Повтор {task.rep} (seed={task.seed}) упал: {type(e).__name__}: {e}")
        return ReplicationResult(rep=task.rep, seed=task.seed, runtime=time.perf_counter() - started,
                                 error=f"{type(e).__name__}: {e}")
    logger.debug(f"Повтор {task.rep}: MCE={result.test_mce:.4f}, {result.runtime:.2f} с")
    return result


def _values(results, name: str) -> np.ndarray:
    return np.array([getattr(r, name) for r in results if r.ok and getattr(r, name) is not None], dtype=float)


def _mean(values: np.ndarray) -> float | None:
    return float(values.mean()) if values.size else None


@dataclass
class ReplicationReport:
    """Итог повторов: средние и стандартные ошибки"""
    scenario: str
    method: str
    n_train: int
    n_test: int
    base_seed: int
    results: list[ReplicationResult] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def reps(self) -> int:
        return len(self.results)

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.results)

    def mean(self, name: str) -> float | None:
        return _mean(_values(self.results, name))

    def se(self, name: str) -> float | None:
        return standard_error(_values(self.results, name))

    def median(self, name: str) -> float | None:
        values = _values(self.results, name)
        return float(np.median(values)) if values.size else None

    def summary(self) -> dict:
        data = {
            "scenario": self.scenario,
            "method": self.method,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "reps": self.reps,
            "failures": self.failures,
            "mean_mce": self.mean("test_mce"),
            "se_mce": self.se("test_mce"),
            "mean_ideal_mce": self.mean("ideal_mce"),
            "mean_estimation_error": self.mean("estimation_error"),
            "runtime": round(self.runtime, 3),
        }
        if self.method == "population":
            data["mean_c_hat"] = self.mean("c_hat")
            data["se_c_hat"] = self.se("c_hat")
        return data

    def as_dict(self) -> dict:
        data = self.summary()
        data["base_seed"] = self.base_seed
        data["replications"] = [asdict(r) for r in self.results]
        return data


def _run(source, scenario_id: str, method: str, n_train: int, n_test: int, reps: int, base_seed: int,
         config: SimulationConfig, threads: int) -> ReplicationReport:
    if reps < 1:
        raise BadParameterError(f"Число повторов должно быть >= 1, получено {reps}.")
    if method not in METHODS:
        raise BadParameterError(f"Неизвестный метод '{method}', доступны: {', '.join(METHODS)}.")
    if method != "population" and source.covariate_dim == 0:
        raise BadParameterError(f"Метод {method} требует ковариат, у источника '{scenario_id}' их нет.")

    tasks = [_ReplicationTask(source, method, n_train, n_test, rep, seed, config)
             for rep, seed in enumerate(replication_seeds(base_seed, reps))]
    logger.info(f"Симуляция {scenario_id}/{method}: n={n_train}, повторов={reps}, потоков={threads}")
    started = time.perf_counter()
    if threads > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_replicate, tasks))
    else:
        results = [_replicate(task) for task in tasks]
    report = ReplicationReport(scenario_id, method, n_train, n_test, int(base_seed), results,
                               time.perf_counter() - started)
    mean_mce = report.mean("test_mce")
    logger.info(f"Готово {scenario_id}/{method}: MCE={'нет' if mean_mce is None else f'{mean_mce:.4f}'}, "
                f"ошибок={report.failures}, {report.runtime:.1f} с")
    return report


def run_replications(scenario_id: str, method: str, n_train: int, reps: int, base_seed: int = 0,
                     config: SimulationConfig | None = None, threads: int = 1) -> ReplicationReport:
    """Повторы сценария с независимыми потоками случайных чисел"""
    config = config or SimulationConfig()
    if n_train < 1:
        raise BadParameterError(f"n_train должен быть > 0, получено {n_train}.")
    source = get_scenario(scenario_id)
    return _run(source, source.id, method, n_train, config.n_test, reps, base_seed, config, threads)


def run_dataset_comparison(dataset: Dataset, n_train: int, reps: int, base_seed: int = 0,
                           config: SimulationConfig | None = None, threads: int = 1,
                           methods: tuple[str, ...] = METHODS) -> list[ReplicationReport]:
    """Сравнение методов на случайных разбиениях пользовательского набора"""
    config = config or SimulationConfig()
    if not 0 < n_train < len(dataset):
        raise BadSplitSizeError(f"n_train должен быть в (0, {len(dataset)}), получено {n_train}.")
    source = EmpiricalSplitSource(dataset)
    if dataset.covariate_dim == 0:
        skipped = [m for m in methods if m != "population"]
        if skipped:
            logger.warning(f"В данных нет ковариат, пропускаю: {', '.join(skipped)}")
        methods = tuple(m for m in methods if m == "population")
    n_test = len(dataset) - n_train
    return [_run(source, source.id, method, n_train, n_test, reps, base_seed, config, threads)
            for method in methods]


@dataclass(frozen=True)
class SensitivityRow:
    delta: float
    lam: float
    b: float
    coefficients: tuple[float, ...] | None
    test_mce: float
    estimation_error: float


def delta_sensitivity(scenario_id: str = "pers1", n_train: int = 250, deltas: tuple[float, ...] | None = None,
                      seed: int = 0, config: SimulationConfig | None = None,
                      method: str = "personalized-linear") -> list[SensitivityRow]:
    """Одна фиксированная выборка, модель для каждого delta с lambda из CV"""
    config = config or SimulationConfig()
    deltas = config.sensitivity_deltas if deltas is None else tuple(deltas)
    if not deltas or any(not d > 0 for d in deltas):
        raise BadParameterError("Сетка delta должна быть непустой и положительной.")
    if method == "population":
        raise BadParameterError("Анализ чувствительности к delta нужен только персонализированному методу.")
    source = get_scenario(scenario_id)
    train, test = source.draw(n_train, config.n_test, seed)
    truth = source.ideal_threshold(test.z)
    rows = []
    for delta in deltas:
        model, lam = fit_method(method, train, config, seed, delta=delta)
        predicted = model.predict(test.z)
        beta = model.linear_coefficients()
        rows.append(SensitivityRow(
            delta=float(delta),
            lam=float(lam),
            b=model.b,
            coefficients=None if beta is None else tuple(float(v) for v in beta),
            test_mce=misclassification_error(test.x, test.y, predicted),
            estimation_error=float(np.mean(np.abs(predicted - truth))),
        ))
        logger.info(f"delta={delta:g}: lambda={lam:g}, MCE={rows[-1].test_mce:.4f}")
    return rows


@dataclass(frozen=True)
class TrendRow:
    n_train: int
    median_error: float | None
    mean_mce: float | None
    reps_ok: int


def consistency_trend(scenario_id: str = "pop1", sizes: tuple[int, ...] | None = None, reps: int = 50,
                      base_seed: int = 0, config: SimulationConfig | None = None,
                      method: str = "population", threads: int = 1) -> list[TrendRow]:
    """Медиана |c_hat(z) - c*(z)| по повторам для растущих n"""
    config = config or SimulationConfig()
    sizes = config.trend_sizes if sizes is None else tuple(sizes)
    rows = []
    for n in sizes:
        report = run_replications(scenario_id, method, n, reps, base_seed, config, threads)
        rows.append(TrendRow(n, report.median("estimation_error"), report.mean("test_mce"),
                             report.reps - report.failures))
    return rows
