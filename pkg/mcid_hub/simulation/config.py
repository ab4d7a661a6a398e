from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from mcid_hub.constants import BANDWIDTH_RULE, DATA_PATH, DEFAULT_DELTA, DEFAULT_FOLDS, DEFAULT_N_TEST
from mcid_hub.core.exceptions import BadParameterError
from mcid_hub.core.kernels import KernelSpec
from mcid_hub.core.model_selection import CvPlan, default_lambda_grid
from mcid_hub.core.personalized import DcaConfig

METHODS = ("population", "personalized-linear", "personalized-gaussian")
SENSITIVITY_DELTAS = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0)
TREND_SIZES = (250, 1000, 4000)


@dataclass(frozen=True)
class SimulationConfig:
    """Настройки симуляций"""
    n_test: int = DEFAULT_N_TEST
    delta: float = DEFAULT_DELTA
    folds: int = DEFAULT_FOLDS
    lambdas: tuple[float, ...] = field(default_factory=default_lambda_grid)
    # фиксированное lambda вместо кросс-валидации
    lam: float | None = None
    sigma2: float | None = None
    bandwidth_rule: str = BANDWIDTH_RULE
    dca: DcaConfig = field(default_factory=DcaConfig)
    sensitivity_deltas: tuple[float, ...] = SENSITIVITY_DELTAS
    trend_sizes: tuple[int, ...] = TREND_SIZES
    history_path: Path = DATA_PATH / "simulation_history.json"

    def __post_init__(self):
        if self.n_test < 1:
            raise BadParameterError(f"n_test должен быть > 0, получено {self.n_test}.")
        if not self.delta > 0:
            raise BadParameterError(f"delta должен быть > 0, получено {self.delta}.")
        if self.lam is not None and not self.lam > 0:
            raise BadParameterError(f"lambda должен быть > 0, получено {self.lam}.")
        if any(not d > 0 for d in self.sensitivity_deltas):
            raise BadParameterError("Сетка delta должна быть положительной.")
        if any(n < 2 for n in self.trend_sizes):
            raise BadParameterError("Размеры выборок для тренда должны быть >= 2.")

    def kernel_for(self, method: str) -> KernelSpec | None:
        if method not in METHODS:
            raise BadParameterError(f"Неизвестный метод '{method}', доступны: {', '.join(METHODS)}.")
        if method == "population":
            return None
        if method == "personalized-linear":
            return KernelSpec.linear()
        return KernelSpec.gaussian(self.sigma2, self.bandwidth_rule)

    def cv_plan(self, seed: int) -> CvPlan:
        return CvPlan(self.folds, self.lambdas, int(seed))

    def as_dict(self) -> dict:
        data = asdict(self)
        data["lambdas"] = [float(np.min(self.lambdas)), float(np.max(self.lambdas)), len(self.lambdas)]
        data["history_path"] = str(self.history_path)
        return data
