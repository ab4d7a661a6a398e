import numpy as np

from mcid_hub.core.exceptions import EmptyDatasetError


def sign(u):
    """sign(u) = 1 при u >= 0, иначе -1"""
    return np.where(np.asarray(u, dtype=float) >= 0, 1, -1)


def misclassification_error(x, y, thresholds) -> float:
    """Доля наблюдений с y != sign(x - c)"""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyDatasetError("Нельзя считать MCE на пустой выборке.")
    predicted = sign(x - np.asarray(thresholds, dtype=float))
    return float(np.mean(predicted != np.asarray(y)))


def standard_error(values) -> float | None:
    """Стандартная ошибка среднего; None при одном значении"""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size < 2:
        return None
    return float(np.std(values, ddof=1) / np.sqrt(values.size))
