import os
import tomllib
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

DEFAULTS: dict[str, Any] = {
    "data_path": "data",
    "log_path": "data/mcid.log",
    "simulation_log_path": "data/simulation.log",
    "log_level": "INFO",
    "default_delta": 0.1,
    "default_folds": 5,
    "n_test": 2000,
    "bandwidth_rule": "median",
    "max_outer_iters": 50,
    "outer_tol": 1e-5,
    "inner_tol": 1e-7,
    "inner_max_iters": 20000,
    "quad_tol": 1e-8,
    "dca_starts": ("hinge", "population", "zero"),
    "threads": None,
}

# переменные окружения перекрывают pyproject
ENV_OVERRIDES = {
    "MCID_LOG_LEVEL": "log_level",
    "MCID_THREADS": "threads",
    "MCID_DATA_PATH": "data_path",
}


class SettingsLoader:
    """Синглтон для работы с настройками из [tool.mcid_hub]"""
    _instance = None
    _project_root = Path(__file__).parent.parent.parent
    _config_path = _project_root / "pyproject.toml"

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self):
        self._config = dict(DEFAULTS)
        if self._config_path.exists():
            with open(self._config_path, "rb") as f:
                toml_data = tomllib.load(f)
            self._config.update(toml_data.get("tool", {}).get("mcid_hub", {}))

        load_dotenv()
        for env_name, key in ENV_OVERRIDES.items():
            value = os.getenv(env_name)
            if value:
                self._config[key] = int(value) if key == "threads" else value

        for key in ("data_path", "log_path", "simulation_log_path"):
            self._config[key] = self._project_root / self._config[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self._config.get(key, default)

    def as_dict(self) -> dict[str, Any]:
        return {k: str(v) if isinstance(v, Path) else v for k, v in self._config.items()}
