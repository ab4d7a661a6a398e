from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from mcid_hub.core.exceptions import (
    BadParameterError,
    BadWeightError,
    EmptyDatasetError,
    EmptyNegativeClassError,
    RootNotBracketedError,
)
from mcid_hub.core.losses import (
    HingeLoss,
    LogisticLoss,
    Loss,
    PopulationSpec,
    PsiDeltaLoss,
    PsiLoss,
    ZeroOneLoss,
    counterexample_spec,
    surrogate_minimizer,
)
from mcid_hub.core.models import Dataset, FitMode, ThresholdFit

# допуск на равенство взвешенных рисков
TIE_ATOL = 1e-12


@dataclass(frozen=True)
class _ErrorCounts:
    candidates: np.ndarray
    misses: np.ndarray
    false_positives: np.ndarray
    n_pos: int
    n_neg: int


def candidate_thresholds(x) -> np.ndarray:
    """Уникальные x по возрастанию и сторож max(x) + 1 (все предсказания -1)"""
    unique = np.unique(np.asarray(x, dtype=float))
    return np.append(unique, unique[-1] + 1.0)


def _error_counts(train: Dataset) -> _ErrorCounts:
    if len(train) == 0:
        raise EmptyDatasetError("Нельзя оценить порог по пустой выборке.")
    x, y = train.x, train.y
    candidates = candidate_thresholds(x)
    pos = np.sort(x[y == 1])
    neg = np.sort(x[y == -1])
    # при пороге c: +1 предсказывается для x >= c
    misses = np.searchsorted(pos, candidates, side="left")
    false_positives = neg.size - np.searchsorted(neg, candidates, side="left")
    return _ErrorCounts(candidates, misses, false_positives, pos.size, neg.size)


def _largest_minimizer(candidates: np.ndarray, risks: np.ndarray, exact: bool) -> tuple[float, float, tuple]:
    best = risks.min()
    mask = risks == best if exact else np.isclose(risks, best, rtol=0.0, atol=TIE_ATOL)
    minimizers = candidates[mask]
    return float(minimizers[-1]), float(best), tuple(float(c) for c in minimizers)


def fit_population(train: Dataset) -> ThresholdFit:
    """Точный минимум эмпирического 0-1 риска по точкам разрыва"""
    counts = _error_counts(train)
    n = len(train)
    errors = counts.misses + counts.false_positives
    c_hat, best, minimizers = _largest_minimizer(counts.candidates, errors, exact=True)
    k = int(np.searchsorted(counts.candidates, c_hat))
    return ThresholdFit(
        c_hat=c_hat,
        empirical_risk=best / n,
        minimizer_set=minimizers,
        weight_w=0.5,
        mode=FitMode.UNWEIGHTED,
        type_one_error=_rate(counts.false_positives[k], counts.n_neg),
        type_two_error=_rate(counts.misses[k], counts.n_pos),
        n_samples=n,
    )


def fit_weighted(train: Dataset, w: float) -> ThresholdFit:
    """Взвешенный MCID: промах по y = +1 стоит w, ложный плюс по y = -1 стоит 1 - w"""
    if not 0 < w < 1:
        raise BadWeightError(f"Вес w должен быть в (0, 1), получено {w}.")
    counts = _error_counts(train)
    n = len(train)
    # (1/2n) sum w(y)(1 - y sign(x - c)) = (1/n) sum w(y) I(ошибка)
    risks = (w * counts.misses + (1.0 - w) * counts.false_positives) / n
    c_hat, best, minimizers = _largest_minimizer(counts.candidates, risks, exact=False)
    k = int(np.searchsorted(counts.candidates, c_hat))
    return ThresholdFit(
        c_hat=c_hat,
        empirical_risk=best,
        minimizer_set=minimizers,
        weight_w=float(w),
        mode=FitMode.WEIGHTED,
        type_one_error=_rate(counts.false_positives[k], counts.n_neg),
        type_two_error=_rate(counts.misses[k], counts.n_pos),
        n_samples=n,
    )


def fit_neyman_pearson(train: Dataset, alpha: float) -> ThresholdFit:
    """min R1(c) при R0(c) <= alpha; R0 - доля y = -1 с x >= c"""
    if not 0 < alpha < 1:
        raise BadParameterError(f"alpha должен быть в (0, 1), получено {alpha}.")
    counts = _error_counts(train)
    if counts.n_neg == 0:
        raise EmptyNegativeClassError("Для ограничения на ошибку I рода нужны наблюдения с y = -1.")
    r0 = counts.false_positives / counts.n_neg
    r1 = counts.misses / counts.n_pos if counts.n_pos else np.zeros_like(r0)
    # сторож всегда допустим: R0 = 0
    feasible = np.flatnonzero(r0 <= alpha)
    k = int(feasible[0])
    tied = feasible[r1[feasible] == r1[k]]
    n = len(train)
    return ThresholdFit(
        c_hat=float(counts.candidates[k]),
        empirical_risk=float((counts.misses[k] + counts.false_positives[k]) / n),
        minimizer_set=tuple(float(c) for c in counts.candidates[tied]),
        weight_w=0.5,
        mode=FitMode.NEYMAN_PEARSON,
        alpha=float(alpha),
        type_one_error=float(r0[k]),
        type_two_error=float(r1[k]),
        n_samples=n,
    )


def _rate(count, total: int) -> float:
    return float(count / total) if total else 0.0


def empirical_risk_at(train: Dataset, c: float, w: float = 0.5) -> float:
    """Риск в произвольной точке c; при w = 0.5 это доля ошибок"""
    x, y = train.x, train.y
    predicted_pos = x >= c
    misses = np.sum((y == 1) & ~predicted_pos)
    false_positives = np.sum((y == -1) & predicted_pos)
    if w == 0.5:
        return float((misses + false_positives) / len(train))
    return float((w * misses + (1 - w) * false_positives) / len(train))


def ideal_mcid(spec: PopulationSpec, w: float = 0.5, rule: str = "largest", xtol: float = 1e-12) -> float:
    """Корень p(c) = 1 - w бисекцией на [a, b]

    rule="largest": sup{c : p(c) <= 1 - w}, консервативный выбор при плоской p;
    rule="smallest": inf{c : p(c) >= 1 - w}, годится и для полунепрерывной p.
    Для строго возрастающей непрерывной p оба правила дают единственный корень.
    """
    if not 0 < w < 1:
        raise BadWeightError(f"Вес w должен быть в (0, 1), получено {w}.")
    if rule not in ("largest", "smallest"):
        raise BadParameterError(f"Неизвестное правило '{rule}'.")
    target = 1.0 - w

    if rule == "largest":
        def indicator(c):
            return 0.5 if float(spec.p(c)) > target else -0.5
    else:
        def indicator(c):
            return 0.5 if float(spec.p(c)) >= target else -0.5

    if indicator(spec.a) > 0 or indicator(spec.b) < 0:
        raise RootNotBracketedError(
            f"p(c) = {target} не имеет корня на [{spec.a}, {spec.b}]: "
            f"p(a)={float(spec.p(spec.a)):.4f}, p(b)={float(spec.p(spec.b)):.4f}.")
    return float(bisect(indicator, spec.a, spec.b, xtol=xtol, maxiter=500))


@dataclass(frozen=True)
class InconsistencyRow:
    loss: str
    minimizer: float
    c_star: float

    @property
    def gap(self) -> float:
        return self.minimizer - self.c_star


def inconsistency_table(spec: PopulationSpec | None = None,
                        deltas: tuple[float, ...] = (0.01,)) -> list[InconsistencyRow]:
    """Минимизаторы популяционного риска разных потерь против c*"""
    spec = spec or counterexample_spec()
    c_star = ideal_mcid(spec, 0.5)
    losses: list[Loss] = [ZeroOneLoss(), HingeLoss(), LogisticLoss(), PsiLoss()]
    losses += [PsiDeltaLoss(d) for d in deltas]
    rows = []
    for loss in losses:
        label = loss.name if not isinstance(loss, PsiDeltaLoss) else f"psi_delta({loss.delta:g})"
        rows.append(InconsistencyRow(label, surrogate_minimizer(loss, spec), c_star))
    return rows
