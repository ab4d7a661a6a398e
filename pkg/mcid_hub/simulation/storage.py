import json
import os
from datetime import datetime
from pathlib import Path

from mcid_hub.logging_config import simulation_logger

logger = simulation_logger


class ReportStorage:
    """Сохранение отчётов симуляций и журнала запусков"""
    def __init__(self, history_path):
        self.history_path = Path(history_path)

    def _load(self, path: Path, default):
        if not path.exists():
            return default
        content = path.read_text(encoding="utf-8").strip()
        if not content:
            return default
        try:
            return json.loads(content)
        except json.JSONDecodeError:
            logger.warning(f"Файл {path} сломан, начинаю журнал заново")
            return default

    def _save(self, path: Path, data) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=4, ensure_ascii=False)
        os.replace(tmp, path)

    def record_run(self, kind: str, summary: dict) -> str:
        """Добавляет краткую запись о запуске; повтор с тем же id заменяет старую"""
        now = datetime.now().strftime("%Y-%m-%dT%H:%M:%S")
        run_id = f"{kind}_{summary.get('scenario', 'data')}_{summary.get('method', '')}_{summary.get('n_train', '')}"
        run_id = f"{run_id}_{summary.get('base_seed', 0)}"
        entry = {"id": run_id, "kind": kind, "timestamp": now, "summary": summary}
        history = [h for h in self._load(self.history_path, []) if h.get("id") != run_id]
        history.append(entry)
        self._save(self.history_path, history)
        return run_id

    def history(self) -> list[dict]:
        return self._load(self.history_path, [])
