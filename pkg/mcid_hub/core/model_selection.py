import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.model_selection import StratifiedKFold

from mcid_hub.constants import DEFAULT_FOLDS
from mcid_hub.core.exceptions import BadParameterError, DegenerateFoldError
from mcid_hub.core.kernels import KernelMatrix, KernelSpec, gram
from mcid_hub.core.models import Dataset, PersonalizedModel
from mcid_hub.core.personalized import DcaConfig, dca_fit
from mcid_hub.core.utils import misclassification_error

logger = logging.getLogger("mcid.cv")


def default_lambda_grid() -> tuple[float, ...]:
    """{10^((s - 31)/10): s = 1..61}, от 1e-3 до 1e3"""
    return tuple(float(10.0 ** ((s - 31) / 10)) for s in range(1, 62))


@dataclass(frozen=True)
class CvPlan:
    k: int = DEFAULT_FOLDS
    lambdas: tuple[float, ...] = field(default_factory=default_lambda_grid)
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise BadParameterError(f"Число фолдов должно быть >= 2, получено {self.k}.")
        if len(self.lambdas) == 0:
            raise BadParameterError("Сетка lambda пуста.")
        if any(not (np.isfinite(lam) and lam > 0) for lam in self.lambdas):
            raise BadParameterError("Все значения lambda должны быть > 0.")


@dataclass(frozen=True)
class CvResult:
    best_lambda: float
    lambdas: tuple[float, ...]
    scores: np.ndarray

    @property
    def mean_scores(self) -> np.ndarray:
        return self.scores.mean(axis=1)

    def table(self) -> list[tuple[float, float]]:
        return [(lam, float(score)) for lam, score in zip(self.lambdas, self.mean_scores)]

    def as_dict(self) -> dict:
        return {
            "best_lambda": self.best_lambda,
            "cv_table": [{"lambda": lam, "mean_mce": score} for lam, score in self.table()],
        }


def make_folds(train: Dataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Стратифицированные по метке фолды, воспроизводимые по seed"""
    counts = train.label_counts()
    if min(counts.values()) < k:
        raise DegenerateFoldError(
            f"Для {k} фолдов нужно не меньше {k} наблюдений каждого класса, есть {counts}.")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=int(seed) % (2 ** 32))
    folds = []
    y = train.y
    for fit_idx, held_idx in splitter.split(np.zeros(len(train)), y):
        if np.unique(y[fit_idx]).size < 2 or np.unique(y[held_idx]).size < 2:
            raise DegenerateFoldError("Фолд содержит наблюдения только одного класса.")
        folds.append((fit_idx, held_idx))
    return folds


def _fold_score(train: Dataset, full_gram: KernelMatrix, fit_idx: np.ndarray, held_idx: np.ndarray,
                delta: float, lam: float, config: DcaConfig) -> float:
    model = dca_fit(train.subset(fit_idx), full_gram.spec, delta, lam, config, gram_matrix=full_gram.subset(fit_idx))
    held = train.subset(held_idx)
    return misclassification_error(held.x, held.y, model.predict(held.z))


def select_lambda(lambdas, mean_scores) -> float:
    """argmin среднего MCE; при равенстве берётся большее lambda"""
    lambdas = np.asarray(lambdas, dtype=float)
    mean_scores = np.asarray(mean_scores, dtype=float)
    tied = lambdas[mean_scores == mean_scores.min()]
    return float(tied.max())


def cross_validate(train: Dataset, kernel: KernelSpec, delta: float, plan: CvPlan | None = None,
                   config: DcaConfig | None = None, threads: int = 1) -> CvResult:
    """k-фолдовая кросс-валидация по сетке lambda с оценкой по MCE на отложенном фолде"""
    plan = plan or CvPlan()
    config = config or DcaConfig()
    folds = make_folds(train, plan.k, plan.seed)
    kernel = kernel.resolve(train.z)
    full_gram = gram(kernel, train.z)

    jobs = [(i, j, lam, fit_idx, held_idx)
            for i, lam in enumerate(plan.lambdas)
            for j, (fit_idx, held_idx) in enumerate(folds)]
    scores = np.empty((len(plan.lambdas), plan.k))

    def run(job):
        i, j, lam, fit_idx, held_idx = job
        return i, j, _fold_score(train, full_gram, fit_idx, held_idx, delta, lam, config)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for i, j, score in results:
        scores[i, j] = score

    best = select_lambda(plan.lambdas, scores.mean(axis=1))
    logger.debug(f"CV: k={plan.k}, |сетка|={len(plan.lambdas)}, lambda*={best:g}")
    return CvResult(best, tuple(float(lam) for lam in plan.lambdas), scores)


def fit_with_cv(train: Dataset, kernel: KernelSpec, delta: float, plan: CvPlan | None = None,
                config: DcaConfig | None = None, threads: int = 1) -> tuple[PersonalizedModel, CvResult]:
    """Выбор lambda кросс-валидацией и переобучение на всей выборке"""
    kernel = kernel.resolve(train.z)
    cv = cross_validate(train, kernel, delta, plan, config, threads)
    model = dca_fit(train, kernel, delta, cv.best_lambda, config)
    return model, cv
