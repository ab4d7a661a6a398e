"""Оценка MCID: популяционный порог, персонализированный порог и симуляции."""

__version__ = "0.1.0"
