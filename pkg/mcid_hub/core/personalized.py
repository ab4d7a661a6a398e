import logging
from dataclasses import dataclass

import numpy as np

from mcid_hub.constants import DCA_STARTS, INNER_MAX_ITERS, INNER_TOL, MAX_OUTER_ITERS, OUTER_TOL
from mcid_hub.core.exceptions import (
    BadParameterError,
    DimensionMismatchError,
    EmptyDatasetError,
    NonDecreasingObjectiveError,
)
from mcid_hub.core.inner_solver import InnerProblem, LinearTerm, solve_inner
from mcid_hub.core.kernels import KernelMatrix, KernelSpec, gram
from mcid_hub.core.losses import psi_delta_dc_parts
from mcid_hub.core.models import Dataset, PersonalizedModel
from mcid_hub.core.population import fit_population

logger = logging.getLogger("mcid.dca")

START_POLICIES = ("hinge", "population", "zero")


@dataclass(frozen=True)
class DcaConfig:
    """Настройки DCA и внутреннего решателя"""
    max_outer_iters: int = MAX_OUTER_ITERS
    outer_tol: float = OUTER_TOL
    inner_tol: float = INNER_TOL
    inner_max_iters: int = INNER_MAX_ITERS
    starts: tuple[str, ...] = DCA_STARTS
    descent_slack: float = 1e-10

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.inner_max_iters < 1:
            raise BadParameterError("Число итераций должно быть >= 1.")
        if min(self.outer_tol, self.inner_tol, self.descent_slack) <= 0:
            raise BadParameterError("Все допуски DCA должны быть > 0.")
        if isinstance(self.starts, str):
            object.__setattr__(self, "starts", (self.starts,))
        if not self.starts:
            raise BadParameterError("Нужна хотя бы одна стартовая точка DCA.")
        for start in self.starts:
            if start not in START_POLICIES:
                raise BadParameterError(f"Неизвестная стартовая точка DCA '{start}'.")


def _psi_delta_risk(problem: InnerProblem, b: float, f: np.ndarray) -> float:
    s1, s2 = psi_delta_dc_parts(problem.delta, problem.y * (problem.x - b - f))
    return float(np.mean(s1 - s2))


def full_objective(problem: InnerProblem, b: float, w: np.ndarray, f: np.ndarray | None = None) -> float:
    """s(b, w) = (1/n) sum L_delta(y_i(x_i - c(z_i))) + (lam/2) w^T K w"""
    f = problem.K @ w if f is None else f
    return _psi_delta_risk(problem, b, f) + 0.5 * problem.lam * float(w @ f)


def split_objective(problem: InnerProblem, b: float, w: np.ndarray) -> tuple[float, float]:
    """Разложение s = s1 - s2"""
    f = problem.K @ w
    s1_terms, s2_terms = psi_delta_dc_parts(problem.delta, problem.y * (problem.x - b - f))
    s1 = float(np.mean(s1_terms)) + 0.5 * problem.lam * float(w @ f)
    return s1, float(np.mean(s2_terms))


def s2_subgradient(problem: InnerProblem, b: float, f: np.ndarray) -> LinearTerm:
    """Субградиент s2: (1/(n delta)) sum_{y_i(x_i - c(z_i)) < 0} y_i [1; K_i]"""
    active = problem.y * (problem.x - b - f) < 0
    coef = np.where(active, problem.y, 0.0) * problem.box
    return LinearTerm(float(coef.sum()), coef)


def majorizer(problem: InnerProblem, b_k: float, w_k: np.ndarray, b: float, w: np.ndarray) -> float:
    """Верхняя оценка s в (b, w), построенная в точке (b_k, w_k)"""
    f_k = problem.K @ w_k
    linear = s2_subgradient(problem, b_k, f_k)
    s1, _ = split_objective(problem, b, w)
    _, s2_k = split_objective(problem, b_k, w_k)
    shift = linear.offset * (b - b_k) + float(linear.coef @ (problem.K @ (w - w_k)))
    return s1 - s2_k - shift


def objective(model: PersonalizedModel, train: Dataset) -> float:
    """Целевая функция с psi_delta-потерей и RKHS-штрафом; b не штрафуется"""
    if len(train) == 0:
        raise EmptyDatasetError("Пустая выборка.")
    if train.covariate_dim != model.anchors.shape[1]:
        raise DimensionMismatchError(
            f"Размерность ковариат {train.covariate_dim} не совпадает с моделью ({model.anchors.shape[1]}).")
    thresholds = model.predict(train.z)
    s1, s2 = psi_delta_dc_parts(model.delta, train.y * (train.x - thresholds))
    penalty = float(model.w @ (gram(model.kernel, model.anchors).K @ model.w))
    return float(np.mean(s1 - s2)) + 0.5 * model.lam * penalty


def predict(model: PersonalizedModel, z) -> np.ndarray:
    return model.predict(z)


def _start(problem: InnerProblem, train: Dataset, policy: str, config: DcaConfig) -> tuple[float, np.ndarray]:
    """Начальная точка DCA"""
    if policy == "hinge":
        # выпуклая часть s1 без линеаризации s2
        result = solve_inner(problem, LinearTerm.zero(problem.n), config.inner_tol, config.inner_max_iters)
        return result.b, result.w
    b = fit_population(train).c_hat if policy == "population" else 0.0
    return b, np.zeros(problem.n)


@dataclass
class _Descent:
    b: float
    w: np.ndarray
    trace: list[float]
    gaps: list[float]
    converged: bool


def _descend(problem: InnerProblem, b: float, w: np.ndarray, config: DcaConfig, start: str) -> _Descent:
    f = problem.K @ w
    current = full_objective(problem, b, w, f)
    trace = [current]
    gaps: list[float] = []

    for k in range(1, config.max_outer_iters + 1):
        linear = s2_subgradient(problem, b, f)
        result = solve_inner(problem, linear, config.inner_tol, config.inner_max_iters)
        new_f = problem.K @ result.w
        candidate = full_objective(problem, result.b, result.w, new_f)
        increase = candidate - current
        if increase > result.gap + config.descent_slack:
            raise NonDecreasingObjectiveError(
                f"DCA итерация {k}: рост цели на {increase:.3e} при зазоре подзадачи {result.gap:.3e}.")
        if increase > config.descent_slack:
            logger.warning(f"DCA ({start}) итерация {k}: рост цели {increase:.2e} в пределах зазора "
                           f"подзадачи {result.gap:.2e}, остаёмся в предыдущей точке")
            return _Descent(b, w, trace, gaps, True)
        b, w, f = result.b, result.w, new_f
        trace.append(candidate)
        gaps.append(result.gap)
        logger.debug(f"DCA ({start}) итерация {k}: s={candidate:.8f}, убыль={current - candidate:.2e}, "
                     f"зазор={result.gap:.1e}, SMO={result.iterations}")
        decrease = current - candidate
        current = candidate
        if decrease < config.outer_tol:
            return _Descent(b, w, trace, gaps, True)

    logger.warning(f"DCA ({start}): достигнут лимит {config.max_outer_iters} внешних итераций")
    return _Descent(b, w, trace, gaps, False)


def dca_fit(train: Dataset, kernel: KernelSpec, delta: float, lam: float,
            config: DcaConfig | None = None, gram_matrix: KernelMatrix | None = None) -> PersonalizedModel:
    """Обучение c(z) = b + sum w_i K(z_i, z) алгоритмом DCA.

    DCA запускается из каждой точки config.starts, остаётся решение
    с наименьшим значением цели (при равенстве первое по порядку).
    """
    config = config or DcaConfig()
    if len(train) == 0:
        raise EmptyDatasetError("Нельзя обучить модель по пустой выборке.")
    if train.covariate_dim == 0:
        raise DimensionMismatchError("Для персонализированного MCID нужны ковариаты z.")
    if not (np.isfinite(delta) and delta > 0):
        raise BadParameterError(f"delta должен быть > 0, получено {delta}.")
    if not (np.isfinite(lam) and lam > 0):
        raise BadParameterError(f"lambda должен быть > 0, получено {lam}.")
    if min(train.label_counts().values()) == 0:
        logger.warning("В обучающей выборке только один класс, оценка вырождена.")

    if gram_matrix is None:
        kernel = kernel.resolve(train.z)
        gram_matrix = gram(kernel, train.z)
    elif gram_matrix.n != len(train):
        raise DimensionMismatchError(f"Матрица Грама {gram_matrix.n}x{gram_matrix.n} для выборки {len(train)}.")
    kernel = gram_matrix.spec

    problem = InnerProblem(gram_matrix.K, train.x, train.y.astype(float), float(delta), float(lam))
    best: _Descent | None = None
    best_start = ""
    for start in config.starts:
        descent = _descend(problem, *_start(problem, train, start, config), config, start)
        if best is None or descent.trace[-1] < best.trace[-1]:
            best, best_start = descent, start
    logger.debug(f"DCA: выбран старт '{best_start}', s={best.trace[-1]:.8f}")

    return PersonalizedModel(
        b=float(best.b),
        w=best.w.copy(),
        anchors=np.array(train.z, copy=True),
        kernel=kernel,
        delta=float(delta),
        lam=float(lam),
        trace=tuple(best.trace),
        inner_gaps=tuple(best.gaps),
        converged=best.converged,
    )
