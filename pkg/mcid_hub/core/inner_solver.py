"""Выпуклая подзадача DCA.

    min_{b,w} (1/(n delta)) sum (delta - y_i(x_i - b - (Kw)_i))_+ + (lam/2) w^T K w
              - offset * b - coef^T K w

Решается через двойственную задачу с SMO (выбор пары второго порядка):

    min_a (1/(2 lam)) (y*a - coef)^T K (y*a - coef) - sum a_i (delta - y_i x_i)
    0 <= a_i <= 1/(n delta),  sum y_i a_i = offset

w = (coef - y*a) / lam, b находится точно одномерным поиском по изломам.
Остановка по зазору двойственности.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from mcid_hub.constants import INNER_MAX_ITERS, INNER_TOL
from mcid_hub.core.exceptions import InnerSolverError, MaxItersExceededWarning

logger = logging.getLogger("mcid.inner")

TAU = 1e-12
CHECK_EVERY = 20


@dataclass(frozen=True)
class LinearTerm:
    """Линейная часть <(b, w), (offset, K coef)>"""
    offset: float
    coef: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "LinearTerm":
        return cls(0.0, np.zeros(n))


@dataclass(frozen=True)
class InnerProblem:
    K: np.ndarray
    x: np.ndarray
    y: np.ndarray
    delta: float
    lam: float

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def box(self) -> float:
        return 1.0 / (self.n * self.delta)


@dataclass(frozen=True)
class InnerResult:
    b: float
    w: np.ndarray
    objective: float
    gap: float
    iterations: int
    converged: bool


def subproblem_objective(problem: InnerProblem, linear: LinearTerm, b: float, w: np.ndarray,
                         f: np.ndarray | None = None) -> float:
    """Значение подзадачи в точке (b, w)"""
    f = problem.K @ w if f is None else f
    margins = problem.y * (problem.x - b - f)
    hinge = np.sum(np.maximum(problem.delta - margins, 0.0)) * problem.box
    return float(hinge + 0.5 * problem.lam * (w @ f) - linear.offset * b - linear.coef @ f)


def smooth_part(problem: InnerProblem, linear: LinearTerm, b: float, w: np.ndarray) -> float:
    """Гладкая часть: штраф и линейный член"""
    Kw = problem.K @ w
    return float(0.5 * problem.lam * (w @ Kw) - linear.offset * b - linear.coef @ Kw)


def smooth_gradient(problem: InnerProblem, linear: LinearTerm, b: float, w: np.ndarray) -> tuple[float, np.ndarray]:
    return -linear.offset, problem.lam * (problem.K @ w) - problem.K @ linear.coef


def optimal_offset(problem: InnerProblem, f: np.ndarray, offset: float) -> float:
    """Точный минимум по b кусочно-линейной выпуклой функции при фиксированном Kw"""
    y = problem.y
    breakpoints = np.sort(problem.x - f - problem.delta * y)
    n = breakpoints.size
    # наклон справа от k-го излома: box * (k - r)
    r = np.sum(y < 0) + offset / problem.box
    if r <= 0:
        return float(breakpoints[0])
    if r >= n:
        return float(breakpoints[-1])
    k = int(round(r))
    if abs(r - k) < 1e-9:
        return float(0.5 * (breakpoints[k - 1] + breakpoints[k]))
    return float(breakpoints[int(np.ceil(r)) - 1])


def _feasible_start(y: np.ndarray, coef: np.ndarray, offset: float, box: float) -> np.ndarray:
    alpha = np.clip(y * coef, 0.0, box)
    residual = offset - float(y @ alpha)
    if abs(residual) <= 1e-12 * max(1.0, abs(offset)):
        return alpha
    # сдвигаем sum y_i a_i к offset в пределах коробки
    room = np.where(y > 0, box - alpha, alpha) if residual > 0 else np.where(y > 0, alpha, box - alpha)
    if room.sum() < abs(residual) - 1e-12:
        raise InnerSolverError("Линейный член не согласован с ограничениями: подзадача неограничена снизу.")
    for i in np.flatnonzero(room > 0):
        step = min(room[i], abs(residual))
        alpha[i] += step * y[i] * np.sign(residual)
        residual -= np.sign(residual) * step
        if abs(residual) <= 1e-15:
            break
    return alpha


def solve_inner(problem: InnerProblem, linear: LinearTerm, tol: float = INNER_TOL,
                max_iters: int = INNER_MAX_ITERS) -> InnerResult:
    """SMO по двойственной задаче до зазора двойственности <= tol"""
    K, x, y, lam = problem.K, problem.x, problem.y, problem.lam
    box = problem.box
    coef = np.asarray(linear.coef, dtype=float)
    e = problem.delta - y * x
    diag = np.diag(K)

    alpha = _feasible_start(y, coef, linear.offset, box)
    G = y * (K @ (y * alpha - coef)) / lam - e

    best: InnerResult | None = None
    converged = False
    iteration = 0
    for iteration in range(1, max_iters + 1):
        score = -y * G
        up = np.where(y > 0, alpha < box, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < box)
        if not up.any() or not low.any():
            converged = True
            break
        up_idx = np.flatnonzero(up)
        i = up_idx[np.argmax(score[up_idx])]
        m = score[i]
        low_idx = np.flatnonzero(low & (score < m))
        violation = m - score[low].min()

        if violation <= 1e-12 or iteration % CHECK_EVERY == 0:
            best = _certify(problem, linear, alpha, G, e, iteration, best)
            if best.gap <= tol or violation <= 1e-12:
                converged = True
                break
        if low_idx.size == 0:
            converged = True
            break

        gain = m - score[low_idx]
        curvature = (diag[i] + diag[low_idx] - 2.0 * K[i, low_idx]) / lam
        curvature = np.where(curvature > TAU, curvature, TAU)
        j = low_idx[np.argmax(gain * gain / curvature)]

        a_ij = max((diag[i] + diag[j] - 2.0 * K[i, j]) / lam, TAU)
        step = (m - score[j]) / a_ij
        step = min(step,
                   box - alpha[i] if y[i] > 0 else alpha[i],
                   alpha[j] if y[j] > 0 else box - alpha[j])
        if step <= 0:
            converged = True
            break
        alpha[i] = min(max(alpha[i] + y[i] * step, 0.0), box)
        alpha[j] = min(max(alpha[j] - y[j] * step, 0.0), box)
        G += step * y * (K[:, i] - K[:, j]) / lam

    result = _certify(problem, linear, alpha, G, e, iteration, best)
    if not np.isfinite(result.objective) or not np.all(np.isfinite(result.w)):
        raise InnerSolverError("Внутренний решатель вернул нечисловые значения.")
    if not converged and result.gap > tol:
        logger.warning(f"SMO: лимит {max_iters} итераций, зазор {result.gap:.3e} > {tol:.1e}")
        warnings.warn(f"Внутренний решатель остановлен по лимиту итераций (зазор {result.gap:.3e}).",
                      MaxItersExceededWarning, stacklevel=2)
    return InnerResult(result.b, result.w, result.objective, result.gap, iteration, converged or result.gap <= tol)


def _certify(problem: InnerProblem, linear: LinearTerm, alpha: np.ndarray, G: np.ndarray, e: np.ndarray,
             iteration: int, best: InnerResult | None) -> InnerResult:
    y = problem.y
    # K w = -y (G + e), без лишнего умножения на K
    f = -y * (G + e)
    w = (linear.coef - y * alpha) / problem.lam
    b = optimal_offset(problem, f, linear.offset)
    primal = subproblem_objective(problem, linear, b, w, f)
    dual = float(alpha @ e - 0.5 * problem.lam * (w @ f))
    candidate = InnerResult(b, w, primal, max(primal - dual, 0.0), iteration, False)
    if best is None or candidate.objective <= best.objective:
        return candidate
    # двойственное значение - нижняя граница, годится и для сохранённого итерата
    return InnerResult(best.b, best.w, best.objective, max(best.objective - dual, 0.0), iteration, False)
