import logging

from mcid_hub.constants import DATE_FORMAT, LOG_FORMAT, LOG_LEVEL, LOG_PATH, SIMULATION_LOG_PATH

fit_logger = logging.getLogger("mcid")
simulation_logger = logging.getLogger("mcid.simulation")

_configured = False


def setup_logging(level: str = LOG_LEVEL, console: bool = True) -> None:
    """Настройка логов: журнал операций и журнал симуляций"""
    global _configured
    if _configured:
        return
    LOG_PATH.parent.mkdir(parents=True, exist_ok=True)
    SIMULATION_LOG_PATH.parent.mkdir(parents=True, exist_ok=True)

    fit_logger.setLevel(level)
    fit_logger.handlers.clear()
    fit_file = logging.FileHandler(LOG_PATH, encoding="utf-8")
    fit_file.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    fit_logger.addHandler(fit_file)

    simulation_logger.setLevel(level)
    simulation_logger.handlers.clear()
    # сообщения симуляций не дублируются в журнал операций
    simulation_logger.propagate = False
    if console:
        stream = logging.StreamHandler()
        stream.setFormatter(logging.Formatter("INFO: %(message)s"))
        stream.setLevel(logging.INFO)
        simulation_logger.addHandler(stream)
    simulation_file = logging.FileHandler(SIMULATION_LOG_PATH, encoding="utf-8")
    simulation_file.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    simulation_logger.addHandler(simulation_file)
    _configured = True
