from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from mcid_hub.core.exceptions import (
    BadSplitSizeError,
    DimensionMismatchError,
    EmptyDatasetError,
    McidError,
    MixedCovariateDimError,
    NonBinaryLabelError,
    NonFiniteValueError,
)
from mcid_hub.core.kernels import KernelSpec, cross_gram


@dataclass(frozen=True)
class LabeledSample:
    """Одно наблюдение: балл x, исход y, ковариаты z"""
    x: float
    y: int
    z: tuple[float, ...] = ()


class Dataset:
    """Неизменяемый набор наблюдений (x, y, z)"""

    def __init__(self, x, y, z=None, *, check: bool = True):
        x = np.array(x, dtype=float).reshape(-1)
        labels = np.array(y, dtype=float).reshape(-1)
        if z is None:
            z = np.empty((x.size, 0))
        else:
            z = np.array(z, dtype=float)
            if z.ndim == 1:
                z = z.reshape(-1, 1) if z.size == x.size else z.reshape(1, -1)
        if labels.size != x.size or z.shape[0] != x.size:
            raise DimensionMismatchError(
                f"Длины не совпадают: x={x.size}, y={labels.size}, z={z.shape[0]}.")
        for arr in (x, labels, z):
            arr.setflags(write=False)
        self._x = x
        self._labels = labels
        self._z = z
        if check:
            validate(self).raise_for_errors()

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], *, check: bool = True) -> "Dataset":
        dims = {len(s.z) for s in samples}
        if len(dims) > 1:
            raise MixedCovariateDimError(f"Разные размерности ковариат: {sorted(dims)}.")
        p = dims.pop() if dims else 0
        z = np.array([s.z for s in samples], dtype=float).reshape(len(samples), p)
        return cls([s.x for s in samples], [s.y for s in samples], z, check=check)

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def y(self) -> np.ndarray:
        return self._labels.astype(np.int64)

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def z(self) -> np.ndarray:
        return self._z

    @property
    def covariate_dim(self) -> int:
        return self._z.shape[1]

    def __len__(self) -> int:
        return self._x.size

    def __iter__(self):
        for i in range(len(self)):
            yield LabeledSample(float(self._x[i]), int(self._labels[i]), tuple(float(v) for v in self._z[i]))

    def label_counts(self) -> dict[int, int]:
        return {1: int(np.sum(self._labels == 1)), -1: int(np.sum(self._labels == -1))}

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self._x[idx], self._labels[idx], self._z[idx], check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self._x, other._x) and np.array_equal(self._labels, other._labels)
                and np.array_equal(self._z, other._z))

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, p={self.covariate_dim}, labels={self.label_counts()})"


@dataclass
class ValidationReport:
    """Итог проверки набора данных"""
    n_samples: int
    label_counts: dict[int, int]
    covariate_dim: int
    duplicate_x: int
    nan_count: int
    errors: list[McidError] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.errors

    def raise_for_errors(self) -> None:
        if self.errors:
            raise self.errors[0]

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "label_counts": {str(k): v for k, v in self.label_counts.items()},
            "covariate_dim": self.covariate_dim,
            "duplicate_x": self.duplicate_x,
            "nan_count": self.nan_count,
            "valid": self.is_valid,
            "errors": [f"{type(e).__name__}: {e}" for e in self.errors],
        }


def validate(data: Dataset | Sequence[LabeledSample]) -> ValidationReport:
    """Проверка данных: все ошибки собираются в отчёт, ничего не отбрасывается"""
    errors: list[McidError] = []
    if isinstance(data, Dataset):
        x, labels, z = data.x, data.labels, data.z
    else:
        dims = sorted({len(s.z) for s in data})
        if len(dims) > 1:
            errors.append(MixedCovariateDimError(f"Разные размерности ковариат: {dims}."))
        x = np.array([s.x for s in data], dtype=float)
        labels = np.array([s.y for s in data], dtype=float)
        p = dims[0] if len(dims) == 1 else 0
        z = np.array([s.z for s in data], dtype=float).reshape(x.size, p) if p else np.empty((x.size, 0))

    if x.size == 0:
        errors.append(EmptyDatasetError("Набор данных пуст."))

    bad_labels = ~np.isin(labels, (-1.0, 1.0))
    if bad_labels.any():
        first = int(np.argmax(bad_labels))
        errors.append(NonBinaryLabelError(
            f"Метка {labels[first]!r} в наблюдении {first} не из {{-1, +1}} "
            f"(всего таких: {int(bad_labels.sum())})."))

    nan_count = int(np.sum(~np.isfinite(x)) + np.sum(~np.isfinite(z)))
    if nan_count:
        errors.append(NonFiniteValueError(f"Найдено {nan_count} нечисловых значений (NaN/inf) в x или z."))

    finite_x = x[np.isfinite(x)]
    return ValidationReport(
        n_samples=int(x.size),
        label_counts={1: int(np.sum(labels == 1)), -1: int(np.sum(labels == -1))},
        covariate_dim=int(z.shape[1]) if z.ndim == 2 else 0,
        duplicate_x=int(finite_x.size - np.unique(finite_x).size),
        nan_count=nan_count,
        errors=errors,
    )


def make_rng(seed: int) -> np.random.Generator:
    """Генератор с фиксированным алгоритмом (Philox), одинаковый на всех платформах"""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SplitPlan:
    """Разбиение индексов на обучение и тест"""
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    def apply(self, dataset: Dataset) -> tuple[Dataset, Dataset]:
        return dataset.subset(self.train_indices), dataset.subset(self.test_indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplitPlan):
            return NotImplemented
        return (self.seed == other.seed and np.array_equal(self.train_indices, other.train_indices)
                and np.array_equal(self.test_indices, other.test_indices))


def split(dataset: Dataset, n_train: int, seed: int) -> SplitPlan:
    """Случайное разбиение, воспроизводимое по seed"""
    n = len(dataset)
    if not 0 < n_train < n:
        raise BadSplitSizeError(f"n_train должен быть в (0, {n}), получено {n_train}.")
    perm = make_rng(seed).permutation(n)
    return SplitPlan(np.sort(perm[:n_train]), np.sort(perm[n_train:]), int(seed))


class FitMode(str, Enum):
    UNWEIGHTED = "unweighted"
    WEIGHTED = "weighted"
    NEYMAN_PEARSON = "neyman_pearson"


@dataclass(frozen=True)
class ThresholdFit:
    """Оценённый популяционный порог MCID"""
    c_hat: float
    empirical_risk: float
    minimizer_set: tuple[float, ...]
    weight_w: float = 0.5
    mode: FitMode = FitMode.UNWEIGHTED
    alpha: float | None = None
    type_one_error: float | None = None
    type_two_error: float | None = None
    n_samples: int = 0

    def as_dict(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        data["minimizer_set"] = list(self.minimizer_set)
        return data


@dataclass(frozen=True)
class PersonalizedModel:
    """Персонализированный порог c(z) = b + sum_i w_i K(z_i, z)"""
    b: float
    w: np.ndarray
    anchors: np.ndarray
    kernel: KernelSpec
    delta: float
    lam: float
    trace: tuple[float, ...] = ()
    inner_gaps: tuple[float, ...] = ()
    converged: bool = True

    def __post_init__(self):
        if self.w.shape[0] != self.anchors.shape[0]:
            raise DimensionMismatchError(
                f"Число коэффициентов {self.w.shape[0]} не равно числу опорных точек {self.anchors.shape[0]}.")

    @property
    def n_outer_iters(self) -> int:
        return max(len(self.trace) - 1, 0)

    def predict(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        return self.b + cross_gram(self.kernel, z, self.anchors) @ self.w

    def fitted(self) -> np.ndarray:
        return self.predict(self.anchors)

    def linear_coefficients(self) -> np.ndarray | None:
        """Для линейного ядра c(z) = b + beta^T z"""
        if self.kernel.kind != "linear":
            return None
        return self.anchors.T @ self.w
