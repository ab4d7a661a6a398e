"""Генераторы синтетических данных и источник разбиений реального набора.

Популяционные сценарии (pop*) не имеют ковариат, персонализированные (pers*)
порождают z ~ N(0, I_p), x | z ~ N(m(z), 1) и y ~ Bern(Phi(x - m(z))),
так что истинный порог c*(z) = m(z).
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from mcid_hub.core.exceptions import BadParameterError
from mcid_hub.core.losses import PopulationSpec
from mcid_hub.core.models import Dataset, make_rng, split
from mcid_hub.core.population import ideal_mcid


def _bernoulli_labels(rng: np.random.Generator, p: np.ndarray) -> np.ndarray:
    return np.where(rng.random(p.size) < p, 1, -1)


class BaseScenario(ABC):
    """Сценарий: генерирует выборку и знает истинный порог"""
    id = "base"
    covariate_dim = 0

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> Dataset:
        pass

    @abstractmethod
    def ideal_threshold(self, z: np.ndarray) -> np.ndarray:
        pass

    def draw(self, n_train: int, n_test: int, seed: int) -> tuple[Dataset, Dataset]:
        """Одна выборка n_train + n_test, первые n_train наблюдений идут в обучение"""
        data = self.sample(make_rng(seed), n_train + n_test)
        idx = np.arange(n_train + n_test)
        return data.subset(idx[:n_train]), data.subset(idx[n_train:])

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class PopulationScenario(BaseScenario):
    """Сценарий без ковариат: X и p(x) = P(Y = 1 | X = x)"""

    @abstractmethod
    def sample_x(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pass

    @abstractmethod
    def p(self, x):
        pass

    @abstractmethod
    def population_spec(self) -> PopulationSpec:
        pass

    @cached_property
    def c_star(self) -> float:
        return ideal_mcid(self.population_spec())

    def sample(self, rng, n):
        x = self.sample_x(rng, n)
        y = _bernoulli_labels(rng, np.asarray(self.p(x), dtype=float))
        return Dataset(x, y, check=False)

    def ideal_threshold(self, z):
        return np.full(np.asarray(z).shape[0], self.c_star)


class Pop1(PopulationScenario):
    """X ~ Unif(-1, 1), p(x) = (x + 1)/2, c* = 0"""
    id = "pop1"

    def sample_x(self, rng, n):
        return rng.uniform(-1.0, 1.0, n)

    def p(self, x):
        return (np.asarray(x, dtype=float) + 1.0) / 2.0

    def population_spec(self):
        return PopulationSpec(-1.0, 1.0, self.p, name=self.id)


class Pop2(PopulationScenario):
    """X ~ 0.7 N(-1, 1) + 0.3 N(1, 1), p = функция распределения смеси, c* = медиана смеси"""
    id = "pop2"
    weight = 0.7

    def sample_x(self, rng, n):
        left = rng.random(n) < self.weight
        return np.where(left, -1.0, 1.0) + rng.standard_normal(n)

    def p(self, x):
        x = np.asarray(x, dtype=float)
        return self.weight * ndtr(x + 1.0) + (1.0 - self.weight) * ndtr(x - 1.0)

    def population_spec(self):
        # для c* важна только p; отрезок покрывает всю массу смеси
        return PopulationSpec(-8.0, 8.0, self.p, name=self.id)


class Pop3(PopulationScenario):
    """Модель субъективности: p(x) = Q при x >= c*, иначе 1 - Q"""
    id = "pop3"

    def __init__(self, quality: float = 0.8, threshold: float = 0.3):
        if not 0.5 < quality <= 1.0:
            raise BadParameterError(f"Q должно быть в (0.5, 1], получено {quality}.")
        if not -1.0 < threshold < 1.0:
            raise BadParameterError(f"Порог должен лежать в (-1, 1), получено {threshold}.")
        self.quality = quality
        self.threshold = threshold

    def sample_x(self, rng, n):
        return rng.uniform(-1.0, 1.0, n)

    def p(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.threshold, self.quality, 1.0 - self.quality)

    def population_spec(self):
        return PopulationSpec(-1.0, 1.0, self.p, breakpoints=(self.threshold,), name=self.id)

    @property
    def ideal_mce(self) -> float:
        return 1.0 - self.quality

    def __repr__(self) -> str:
        return f"Pop3(quality={self.quality!r}, threshold={self.threshold!r})"


class PersonalizedScenario(BaseScenario):
    """z ~ N(0, I_p), x | z ~ N(m(z), 1), y ~ Bern(Phi(x - m(z)))"""

    @abstractmethod
    def mean(self, z: np.ndarray) -> np.ndarray:
        pass

    def sample(self, rng, n):
        z = rng.standard_normal((n, self.covariate_dim))
        m = self.mean(z)
        x = m + rng.standard_normal(n)
        y = _bernoulli_labels(rng, ndtr(x - m))
        return Dataset(x, y, z, check=False)

    def ideal_threshold(self, z):
        return self.mean(np.asarray(z, dtype=float).reshape(-1, self.covariate_dim))


class Pers1(PersonalizedScenario):
    """m(z) = z1 + 2 z2"""
    id = "pers1"
    covariate_dim = 2
    coefficients = np.array([1.0, 2.0])

    def mean(self, z):
        return z @ self.coefficients


class Pers2(PersonalizedScenario):
    """m(z) = w^T z - w^T z^2 (квадрат поэлементный), w = (1, 2)"""
    id = "pers2"
    covariate_dim = 2
    coefficients = np.array([1.0, 2.0])

    def mean(self, z):
        return z @ self.coefficients - (z * z) @ self.coefficients


class Pers3(PersonalizedScenario):
    """m(z) = cos(w^T z), w = (1, 1.5, 2)"""
    id = "pers3"
    covariate_dim = 3
    coefficients = np.array([1.0, 1.5, 2.0])

    def mean(self, z):
        return np.cos(z @ self.coefficients)


class EmpiricalSplitSource:
    """Случайные разбиения пользовательского набора на обучение и тест"""
    id = "empirical"

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.covariate_dim = dataset.covariate_dim

    def draw(self, n_train: int, n_test: int, seed: int) -> tuple[Dataset, Dataset]:
        # тестом служат все наблюдения вне обучения, n_test не используется
        return split(self.dataset, n_train, seed).apply(self.dataset)

    def ideal_threshold(self, z) -> None:
        return None

    def __repr__(self) -> str:
        return f"EmpiricalSplitSource({self.dataset!r})"


SCENARIO_REGISTRY: dict[str, type[BaseScenario]] = {
    "pop1": Pop1,
    "pop2": Pop2,
    "pop3": Pop3,
    "pers1": Pers1,
    "pers2": Pers2,
    "pers3": Pers3,
}


def get_scenario(scenario_id: str) -> BaseScenario:
    normalized = scenario_id.strip().lower()
    if normalized not in SCENARIO_REGISTRY:
        raise BadParameterError(
            f"Неизвестный сценарий '{scenario_id}', доступны: {', '.join(SCENARIO_REGISTRY)}.")
    return SCENARIO_REGISTRY[normalized]()


@dataclass(frozen=True)
class SimulationScenario:
    id: str
    n_train: int
    n_test: int
    seed: int = 0

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1:
            raise BadParameterError(f"n_train и n_test должны быть > 0, получено {self.n_train}, {self.n_test}.")
        get_scenario(self.id)

    @property
    def source(self) -> BaseScenario:
        return get_scenario(self.id)


def generate(scenario: SimulationScenario, seed: int | None = None) -> tuple[Dataset, Dataset]:
    """Обучающая и тестовая выборки, детерминированные по seed"""
    seed = scenario.seed if seed is None else seed
    return scenario.source.draw(scenario.n_train, scenario.n_test, seed)
