from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from mcid_hub.core.exceptions import BadParameterError, DegenerateCovariatesError, DimensionMismatchError

KERNEL_KINDS = ("linear", "gaussian")
BANDWIDTH_RULES = ("median", "median_squared")


@dataclass(frozen=True)
class KernelSpec:
    """Ядро: линейное или гауссово с параметром sigma2"""
    kind: str
    sigma2: float | None = None
    bandwidth_rule: str = "median"

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise BadParameterError(f"Неизвестное ядро '{self.kind}', доступны: {', '.join(KERNEL_KINDS)}.")
        if self.bandwidth_rule not in BANDWIDTH_RULES:
            raise BadParameterError(f"Неизвестное правило ширины '{self.bandwidth_rule}'.")
        if self.sigma2 is not None and not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise BadParameterError(f"sigma2 должен быть > 0, получено {self.sigma2}.")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def gaussian(cls, sigma2: float | None = None, bandwidth_rule: str = "median") -> "KernelSpec":
        return cls("gaussian", sigma2, bandwidth_rule)

    @property
    def is_resolved(self) -> bool:
        return self.kind == "linear" or self.sigma2 is not None

    def resolve(self, covariates) -> "KernelSpec":
        """Подставляет sigma2 по медианному правилу, если он не задан"""
        if self.is_resolved:
            return self
        squared = self.bandwidth_rule == "median_squared"
        return KernelSpec(self.kind, resolve_bandwidth(covariates, squared=squared), self.bandwidth_rule)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "sigma2": self.sigma2, "bandwidth_rule": self.bandwidth_rule}

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        return cls(data["kind"], data.get("sigma2"), data.get("bandwidth_rule", "median"))


def resolve_bandwidth(covariates, squared: bool = False) -> float:
    """sigma2 = медиана попарных евклидовых расстояний (squared=True: квадратов расстояний)"""
    z = np.asarray(covariates, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if z.shape[0] < 2:
        raise DegenerateCovariatesError("Для медианного правила нужно хотя бы два вектора ковариат.")
    distances = pdist(z, "sqeuclidean" if squared else "euclidean")
    if not np.any(distances > 0):
        raise DegenerateCovariatesError("Все векторы ковариат совпадают, ширина ядра не определена.")
    return float(np.median(distances))


def _as_matrix(z, name: str) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(1, -1)
    if z.ndim != 2:
        raise DimensionMismatchError(f"{name}: ожидается матрица, получено {z.ndim} измерений.")
    return z


def _require_resolved(spec: KernelSpec) -> None:
    if not spec.is_resolved:
        raise BadParameterError("Ширина гауссова ядра не задана: вызовите spec.resolve(...).")


def kernel_eval(spec: KernelSpec, z1, z2) -> float:
    """K(z1, z2) для одной пары"""
    _require_resolved(spec)
    z1 = np.asarray(z1, dtype=float).reshape(-1)
    z2 = np.asarray(z2, dtype=float).reshape(-1)
    if z1.shape != z2.shape:
        raise DimensionMismatchError(f"Размерности {z1.size} и {z2.size} не совпадают.")
    if spec.kind == "linear":
        return float(z1 @ z2)
    diff = z1 - z2
    return float(np.exp(-(diff @ diff) / (2.0 * spec.sigma2)))


def cross_gram(spec: KernelSpec, left, right) -> np.ndarray:
    """Матрица K(left_i, right_j)"""
    _require_resolved(spec)
    left = _as_matrix(left, "left")
    right = _as_matrix(right, "right")
    if left.shape[1] != right.shape[1]:
        raise DimensionMismatchError(f"Размерности ковариат {left.shape[1]} и {right.shape[1]} не совпадают.")
    if spec.kind == "linear":
        return left @ right.T
    return np.exp(-cdist(left, right, "sqeuclidean") / (2.0 * spec.sigma2))


@dataclass(frozen=True)
class KernelMatrix:
    """Матрица Грама на опорных точках"""
    K: np.ndarray
    anchors: np.ndarray
    spec: KernelSpec

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.K - self.K.T), initial=0.0) <= tol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.K)[0])

    def is_psd(self, slack: float = 1e-8) -> bool:
        return self.min_eigenvalue() >= -slack

    def subset(self, indices) -> "KernelMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return KernelMatrix(self.K[np.ix_(idx, idx)], self.anchors[idx], self.spec)


def gram(spec: KernelSpec, anchors) -> KernelMatrix:
    """Матрица Грама: считается только верхний треугольник"""
    _require_resolved(spec)
    anchors = _as_matrix(anchors, "anchors")
    if spec.kind == "linear":
        K = anchors @ anchors.T
        K = np.triu(K) + np.triu(K, 1).T
    else:
        K = squareform(np.exp(-pdist(anchors, "sqeuclidean") / (2.0 * spec.sigma2)))
        np.fill_diagonal(K, 1.0)
    K.setflags(write=False)
    return KernelMatrix(K, anchors, spec)
