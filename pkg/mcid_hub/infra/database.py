import csv
import io
import json
import os
from pathlib import Path

import numpy as np

from mcid_hub.constants import MODEL_FORMAT_VERSION, REPORT_SCHEMA_VERSION
from mcid_hub.core.exceptions import CsvFormatError, ModelFormatError
from mcid_hub.core.kernels import KernelSpec
from mcid_hub.core.models import Dataset, PersonalizedModel

MODEL_FIELDS = ("b", "w", "anchors", "kernel", "delta", "lam")


class DatabaseManager:
    """Синглтон для работы с файлами: CSV с данными, модели, JSON-отчёты"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def _read_rows(self, path) -> tuple[list[str], list[tuple[int, list[float]]]]:
        path = Path(path)
        if not path.exists():
            raise CsvFormatError(f"файл {path} не найден")
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if not header:
                raise CsvFormatError("нет строки заголовка", line=1)
            header = [h.strip() for h in header]
            rows = []
            for row in reader:
                line = reader.line_num
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise CsvFormatError(f"ожидалось {len(header)} столбцов, получено {len(row)}", line=line)
                try:
                    rows.append((line, [float(cell) for cell in row]))
                except ValueError:
                    bad = next(cell for cell in row if not _is_float(cell))
                    raise CsvFormatError(f"не число: '{bad}'", line=line) from None
        return header, rows

    def read_dataset(self, path, zero_one_labels: bool = False, check: bool = True) -> Dataset:
        """CSV со столбцами x,y,z1..zp"""
        header, rows = self._read_rows(path)
        if header[:2] != ["x", "y"]:
            raise CsvFormatError(f"заголовок должен начинаться с x,y, получено {','.join(header[:2])}", line=1)
        _check_covariate_names(header[2:])
        labels = []
        for line, values in rows:
            label = values[1]
            if zero_one_labels:
                if label not in (0.0, 1.0):
                    raise CsvFormatError(f"метка {label:g} не из {{0, 1}}", line=line)
                label = 1.0 if label == 1.0 else -1.0
            elif check and label not in (-1.0, 1.0):
                raise CsvFormatError(f"метка {label:g} не из {{-1, 1}}", line=line)
            labels.append(label)
        p = len(header) - 2
        data = np.array([values for _, values in rows], dtype=float).reshape(len(rows), len(header))
        return Dataset(data[:, 0], labels, data[:, 2:].reshape(len(rows), p), check=check)

    def read_covariates(self, path) -> tuple[np.ndarray, np.ndarray | None]:
        """CSV со столбцами z1..zp и, по желанию, x"""
        header, rows = self._read_rows(path)
        z_columns = [i for i, name in enumerate(header) if name.startswith("z")]
        _check_covariate_names([header[i] for i in z_columns])
        unknown = [name for name in header if name not in ("x", "y") and not name.startswith("z")]
        if unknown:
            raise CsvFormatError(f"неизвестные столбцы: {', '.join(unknown)}", line=1)
        data = np.array([values for _, values in rows], dtype=float).reshape(len(rows), len(header))
        x = data[:, header.index("x")] if "x" in header else None
        return data[:, z_columns], x

    def write_dataset(self, path, dataset: Dataset) -> None:
        header = ["x", "y"] + [f"z{j + 1}" for j in range(dataset.covariate_dim)]
        with _atomic(path) as tmp:
            with open(tmp, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                for sample in dataset:
                    writer.writerow([repr(sample.x), str(sample.y)] + [repr(v) for v in sample.z])

    @staticmethod
    def _dump_rows(f, rows: list[dict]) -> None:
        columns = list(dict.fromkeys(key for row in rows for key in row))
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})

    def write_rows(self, path, rows: list[dict]) -> None:
        """Таблица отчёта в CSV; столбцы - объединение ключей всех строк"""
        with _atomic(path) as tmp:
            with open(tmp, "w", encoding="utf-8", newline="") as f:
                self._dump_rows(f, rows)

    def rows_to_csv(self, rows: list[dict]) -> str:
        buffer = io.StringIO(newline="")
        self._dump_rows(buffer, rows)
        return buffer.getvalue()

    def save_model(self, path, model: PersonalizedModel) -> None:
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "b": model.b,
            "w": model.w.tolist(),
            "anchors": model.anchors.tolist(),
            "kernel": model.kernel.as_dict(),
            "delta": model.delta,
            "lam": model.lam,
            "trace": list(model.trace),
            "inner_gaps": list(model.inner_gaps),
            "converged": model.converged,
        }
        self.save_json(path, payload)

    def load_model(self, path) -> PersonalizedModel:
        payload = self.load_json(path)
        if not isinstance(payload, dict):
            raise ModelFormatError(f"{path}: ожидается JSON-объект модели")
        version = payload.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ModelFormatError(f"{path}: версия формата {version}, поддерживается {MODEL_FORMAT_VERSION}")
        missing = [key for key in MODEL_FIELDS if key not in payload]
        if missing:
            raise ModelFormatError(f"{path}: нет полей {', '.join(missing)}")
        try:
            w = np.array(payload["w"], dtype=float).reshape(-1)
            anchors = np.array(payload["anchors"], dtype=float)
            if anchors.ndim != 2:
                anchors = anchors.reshape(w.size, -1)
            return PersonalizedModel(
                b=float(payload["b"]),
                w=w,
                anchors=anchors,
                kernel=KernelSpec.from_dict(payload["kernel"]),
                delta=float(payload["delta"]),
                lam=float(payload["lam"]),
                trace=tuple(payload.get("trace", ())),
                inner_gaps=tuple(payload.get("inner_gaps", ())),
                converged=bool(payload.get("converged", True)),
            )
        except (TypeError, ValueError, KeyError) as e:
            raise ModelFormatError(f"{path}: {e}") from e

    def build_report(self, kind: str, result: dict, config: dict) -> dict:
        """Отчёт с версией схемы и полной конфигурацией запуска"""
        return {"schema_version": REPORT_SCHEMA_VERSION, "kind": kind, "config": config, "result": result}

    def load_json(self, path):
        path = Path(path)
        if not path.exists():
            raise ModelFormatError(f"файл {path} не найден")
        try:
            with path.open("r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"{path}: повреждённый JSON ({e})") from e

    def save_json(self, path, data) -> None:
        with _atomic(path) as tmp:
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=4, ensure_ascii=False)


class _atomic:
    """Запись во временный файл и переименование"""

    def __init__(self, path):
        self.path = Path(path)
        self.tmp = self.path.with_name(self.path.name + ".tmp")

    def __enter__(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        return self.tmp

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            if self.tmp.exists():
                self.tmp.unlink()
            return
        os.replace(self.tmp, self.path)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _check_covariate_names(names: list[str]) -> None:
    expected = [f"z{j + 1}" for j in range(len(names))]
    if names != expected:
        raise CsvFormatError(f"столбцы ковариат должны называться {','.join(expected) or '(нет)'}", line=1)
