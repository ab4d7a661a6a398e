import warnings
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import minimize_scalar
from scipy.special import expit

from mcid_hub.constants import QUAD_TOL
from mcid_hub.core.exceptions import BadParameterError, NoBracketFoundError, QuadratureError, UnknownLossError


class Loss(ABC):
    """Функция потерь L(u) от отступа u = y(x - c)"""
    name = "loss"

    def __call__(self, u):
        return self.value(u)

    @abstractmethod
    def value(self, u):
        pass

    @abstractmethod
    def subgradient(self, u):
        pass

    def kinks(self) -> tuple[float, ...]:
        """Точки излома по u"""
        return ()

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and repr(self) == repr(other)

    def __hash__(self) -> int:
        return hash(repr(self))


def _out(values, u):
    return float(values) if np.ndim(u) == 0 else values


class ZeroOneLoss(Loss):
    """L01(u) = (1 - sign(u)) / 2, sign(0) = +1"""
    name = "zero_one"

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.where(u >= 0, 0.0, 1.0), u)

    def subgradient(self, u):
        return _out(np.zeros_like(np.asarray(u, dtype=float)), u)

    def kinks(self):
        return (0.0,)


class PsiDeltaLoss(Loss):
    """L_delta(u) = min((delta - u)_+ / delta, 1)"""
    name = "psi_delta"

    def __init__(self, delta: float):
        self.delta = delta

    @property
    def delta(self) -> float:
        return self._delta

    @delta.setter
    def delta(self, value: float) -> None:
        if not isinstance(value, (int, float)) or not np.isfinite(value):
            raise BadParameterError("delta должен быть конечным числом.")
        if value <= 0:
            raise BadParameterError(f"delta должен быть > 0, получено {value}.")
        self._delta = float(value)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.minimum(np.maximum(self._delta - u, 0.0) / self._delta, 1.0), u)

    def subgradient(self, u):
        # в изломе u = 0 берётся 0 (плоская ветвь), в u = delta левая производная
        u = np.asarray(u, dtype=float)
        return _out(np.where((u > 0) & (u <= self._delta), -1.0 / self._delta, 0.0), u)

    def kinks(self):
        return (0.0, self._delta)

    def __repr__(self) -> str:
        return f"PsiDeltaLoss(delta={self._delta!r})"


class HingeLoss(Loss):
    """L(u) = (1 - u)_+"""
    name = "hinge"

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.maximum(1.0 - u, 0.0), u)

    def subgradient(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.where(u <= 1.0, -1.0, 0.0), u)

    def kinks(self):
        return (1.0,)


class LogisticLoss(Loss):
    """L(u) = log(1 + exp(-u))"""
    name = "logistic"

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.logaddexp(0.0, -u), u)

    def subgradient(self, u):
        u = np.asarray(u, dtype=float)
        return _out(-expit(-u), u)


class PsiLoss(Loss):
    """psi-потеря min((1 - u)_+, 1)"""
    name = "psi"

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.minimum(np.maximum(1.0 - u, 0.0), 1.0), u)

    def subgradient(self, u):
        u = np.asarray(u, dtype=float)
        return _out(np.where((u > 0) & (u <= 1.0), -1.0, 0.0), u)

    def kinks(self):
        return (0.0, 1.0)


LOSS_REGISTRY: dict[str, Callable[..., Loss]] = {
    "zero_one": ZeroOneLoss,
    "psi_delta": PsiDeltaLoss,
    "hinge": HingeLoss,
    "logistic": LogisticLoss,
    "psi": PsiLoss,
}


def get_loss(name: str, delta: float | None = None) -> Loss:
    """Функция получения потерь по имени"""
    normalized = name.strip().lower().replace("-", "_")
    if normalized not in LOSS_REGISTRY:
        raise UnknownLossError(f"Неизвестная функция потерь '{name}'")
    if normalized == "psi_delta":
        if delta is None:
            raise BadParameterError("Для psi_delta нужен параметр delta.")
        return PsiDeltaLoss(delta)
    return LOSS_REGISTRY[normalized]()


def loss_value(kind: Loss, u):
    """L(u) для скаляра или массива отступов"""
    return kind.value(u)


def psi_delta_dc_parts(delta: float, u):
    """Разложение L_delta(u) = (delta - u)_+ / delta - (-u)_+ / delta"""
    if delta <= 0:
        raise BadParameterError(f"delta должен быть > 0, получено {delta}.")
    u = np.asarray(u, dtype=float)
    s1 = np.maximum(delta - u, 0.0) / delta
    s2 = np.maximum(-u, 0.0) / delta
    return _out(s1, u), _out(s2, u)


@dataclass(frozen=True)
class PopulationSpec:
    """Популяция: X ~ Unif(a, b), p(x) = P(Y = 1 | X = x)"""
    a: float
    b: float
    p: Callable
    tolerance: float = QUAD_TOL
    breakpoints: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise BadParameterError(f"Нужно a < b, получено [{self.a}, {self.b}].")
        if self.tolerance <= 0:
            raise BadParameterError("Допуск квадратуры должен быть > 0.")
        grid = np.linspace(self.a, self.b, 201)
        values = np.array([float(self.p(t)) for t in grid])
        if np.any(values < 0) or np.any(values > 1):
            raise BadParameterError("p(x) должна принимать значения в [0, 1].")
        if np.any(np.diff(values) < -1e-12):
            raise BadParameterError("p(x) должна быть неубывающей.")

    @property
    def density(self) -> float:
        return 1.0 / (self.b - self.a)


def population_risk(kind: Loss, spec: PopulationSpec, c: float) -> float:
    """E L(Y(X - c)) адаптивной квадратурой с точками излома"""
    if not np.isfinite(c):
        raise BadParameterError(f"Порог c должен быть конечным, получено {c}.")

    def integrand(x):
        px = float(spec.p(x))
        return (px * loss_value(kind, x - c) + (1.0 - px) * loss_value(kind, c - x)) * spec.density

    candidates = {c + k for k in kind.kinks()} | {c - k for k in kind.kinks()} | set(spec.breakpoints)
    points = sorted(t for t in candidates if spec.a < t < spec.b)
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, _ = quad(integrand, spec.a, spec.b, points=points or None,
                            epsabs=spec.tolerance, epsrel=0.0, limit=200)
        except IntegrationWarning as e:
            raise QuadratureError(f"{kind!r}, c={c}: {e}") from e
    return float(value)


def surrogate_minimizer(kind: Loss, spec: PopulationSpec, grid_size: int = 121, xatol: float = 1e-6) -> float:
    """argmin_c популяционного риска: грубая сетка, затем уточнение внутри скобки"""
    grid = np.linspace(spec.a, spec.b, grid_size)
    risks = np.array([population_risk(kind, spec, c) for c in grid])
    k = int(np.argmin(risks))
    if k == 0 or k == grid_size - 1:
        raise NoBracketFoundError(f"{kind!r}: минимум на краю [{spec.a}, {spec.b}] (c={grid[k]}).")
    result = minimize_scalar(lambda c: population_risk(kind, spec, c),
                             bounds=(grid[k - 1], grid[k + 1]), method="bounded",
                             options={"xatol": xatol})
    return float(result.x)


def _counterexample_p(x):
    x = np.asarray(x, dtype=float)
    values = np.where(x >= 0, 0.5 + 0.4 * x / 3.0, 0.5 * np.exp(np.minimum(x, 0.0)))
    return _out(values, x)


def counterexample_spec() -> PopulationSpec:
    """X ~ Unif(-3, 3), c* = 0: p линейна при x >= 0 и строго выпукла при x < 0"""
    return PopulationSpec(-3.0, 3.0, _counterexample_p, breakpoints=(0.0,), name="counterexample")
