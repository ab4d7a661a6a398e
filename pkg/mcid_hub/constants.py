from mcid_hub.infra.settings import SettingsLoader

settings = SettingsLoader()

DATA_PATH = settings.get("data_path")
LOG_PATH = settings.get("log_path")
SIMULATION_LOG_PATH = settings.get("simulation_log_path")
LOG_LEVEL = str(settings.get("log_level")).upper()
LOG_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

DEFAULT_DELTA = float(settings.get("default_delta"))
DEFAULT_FOLDS = int(settings.get("default_folds"))
DEFAULT_N_TEST = int(settings.get("n_test"))
BANDWIDTH_RULE = settings.get("bandwidth_rule")
MAX_OUTER_ITERS = int(settings.get("max_outer_iters"))
OUTER_TOL = float(settings.get("outer_tol"))
INNER_TOL = float(settings.get("inner_tol"))
INNER_MAX_ITERS = int(settings.get("inner_max_iters"))
QUAD_TOL = float(settings.get("quad_tol"))
DCA_STARTS = tuple(settings.get("dca_starts"))
THREADS = settings.get("threads")

# версии форматов файлов
REPORT_SCHEMA_VERSION = 1
MODEL_FORMAT_VERSION = 1
