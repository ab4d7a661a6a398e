import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from prettytable import PrettyTable

from mcid_hub.constants import (
    BANDWIDTH_RULE,
    DEFAULT_DELTA,
    DEFAULT_FOLDS,
    DEFAULT_N_TEST,
    THREADS,
    settings,
)
from mcid_hub.core.exceptions import McidError
from mcid_hub.core.model_selection import default_lambda_grid
from mcid_hub.core.usecases import (
    compare_file,
    demo_inconsistency,
    fit_np_file,
    fit_personalized_file,
    fit_population_file,
    fit_weighted_file,
    predict_file,
    sensitivity_delta,
    simulate,
    trend,
    validate_file,
)
from mcid_hub.infra.database import DatabaseManager
from mcid_hub.logging_config import setup_logging
from mcid_hub.simulation.config import METHODS, SimulationConfig
from mcid_hub.simulation.scenarios import SCENARIO_REGISTRY

db = DatabaseManager()

# подкоманды, которые по умолчанию используют все ядра
PARALLEL_COMMANDS = ("simulate", "compare", "trend")
# подкоманды, печатающие CSV без --table
CSV_COMMANDS = ("sensitivity-delta", "demo-inconsistency")


@dataclass
class RunConfig:
    """Параметры одного запуска CLI"""
    subcommand: str
    input: str | None = None
    output: str | None = None
    params: dict = field(default_factory=dict)
    json_output: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        params = {k: v for k, v in vars(args).items() if k not in ("command", "input", "output", "json", "table")}
        return cls(args.command, getattr(args, "input", None), args.output, params, args.json)

    def as_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "input": self.input,
            "output": self.output,
            "params": self.params,
            "settings": settings.as_dict(),
        }


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"ожидается число > 0, получено {value}")
    return number


def _lambda_value(value: str) -> float | None:
    if value.strip().lower() == "cv":
        return None
    return _positive_float(value)


def _sigma2_value(value: str) -> float | str:
    if value.strip().lower() in ("median", "median_squared"):
        return value.strip().lower()
    return _positive_float(value)


def _float_list(value: str) -> tuple[float, ...]:
    return tuple(_positive_float(v) for v in value.split(",") if v.strip())


def _int_list(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="печать JSON-отчёта в stdout")
    common.add_argument("--output", help="путь для отчёта (.json или .csv)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)

    labels = argparse.ArgumentParser(add_help=False)
    labels.add_argument("--zero-one-labels", action="store_true", help="метки y в {0, 1} вместо {-1, 1}")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--n-test", type=int, default=DEFAULT_N_TEST)
    sim.add_argument("--delta", type=_positive_float, default=DEFAULT_DELTA)
    sim.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    sim.add_argument("--lambda", dest="lam", type=_lambda_value, default=None, help="число или cv")
    sim.add_argument("--lambda-grid-step", type=int, default=1, help="брать каждое k-е значение сетки lambda")
    sim.add_argument("--sigma2", type=_sigma2_value, default=BANDWIDTH_RULE)

    parser = argparse.ArgumentParser(prog="mcid", description="Оценка MCID по данным опросников")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-population", parents=[common, labels], help="популяционный MCID")
    p.add_argument("input")

    p = sub.add_parser("fit-weighted", parents=[common, labels], help="взвешенный MCID")
    p.add_argument("input")
    p.add_argument("--w", type=float, required=True)

    p = sub.add_parser("fit-np", parents=[common, labels], help="MCID с ограничением на ошибку I рода")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("fit-personalized", parents=[common, labels], help="персонализированный MCID")
    p.add_argument("input")
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--sigma2", type=_sigma2_value, default=BANDWIDTH_RULE)
    p.add_argument("--delta", type=_positive_float, default=DEFAULT_DELTA)
    p.add_argument("--lambda", dest="lam", type=_lambda_value, default=None, help="число или cv")
    p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    p.add_argument("--model-out")

    p = sub.add_parser("predict", parents=[common], help="c(z) по сохранённой модели")
    p.add_argument("input")
    p.add_argument("--model", required=True)

    p = sub.add_parser("simulate", parents=[common, sim], help="повторы синтетического сценария")
    p.add_argument("--scenario", choices=tuple(SCENARIO_REGISTRY), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--method", choices=METHODS, default="population")

    p = sub.add_parser("sensitivity-delta", parents=[common, sim], help="чувствительность к delta")
    p.add_argument("--scenario", choices=tuple(SCENARIO_REGISTRY), default="pers1")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--deltas", type=_float_list, default=None)
    p.add_argument("--method", choices=METHODS[1:], default="personalized-linear")
    p.add_argument("--table", action="store_true", help="таблица вместо CSV в stdout")

    p = sub.add_parser("demo-inconsistency", parents=[common], help="минимизаторы суррогатных потерь")
    p.add_argument("--deltas", type=_float_list, default=(0.01,))
    p.add_argument("--table", action="store_true", help="таблица вместо CSV в stdout")

    p = sub.add_parser("compare", parents=[common, labels, sim], help="сравнение методов на своих данных")
    p.add_argument("input")
    p.add_argument("--n-train", type=int, required=True)
    p.add_argument("--reps", type=int, default=50)

    p = sub.add_parser("trend", parents=[common, sim], help="ошибка оценки при росте n")
    p.add_argument("--scenario", choices=tuple(SCENARIO_REGISTRY), default="pop1")
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--method", choices=METHODS, default="population")

    p = sub.add_parser("validate", parents=[common, labels], help="проверка CSV")
    p.add_argument("input")
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return max(int(args.threads), 1)
    if args.command in PARALLEL_COMMANDS:
        return int(THREADS) if THREADS else (os.cpu_count() or 1)
    return 1


def _simulation_config(args) -> SimulationConfig:
    sigma2 = args.sigma2 if isinstance(args.sigma2, float) else None
    rule = args.sigma2 if isinstance(args.sigma2, str) else BANDWIDTH_RULE
    step = max(args.lambda_grid_step, 1)
    return SimulationConfig(n_test=args.n_test, delta=args.delta, folds=args.folds,
                            lambdas=default_lambda_grid()[::step], lam=args.lam, sigma2=sigma2, bandwidth_rule=rule)


def process_command(args) -> dict:
    """Выполняет подкоманду и возвращает результат"""
    command = args.command
    threads = _threads(args)
    labels = getattr(args, "zero_one_labels", False)

    if command == "fit-population":
        return fit_population_file(args.input, zero_one_labels=labels)
    elif command == "fit-weighted":
        return fit_weighted_file(args.input, w=args.w, zero_one_labels=labels)
    elif command == "fit-np":
        return fit_np_file(args.input, alpha=args.alpha, zero_one_labels=labels)
    elif command == "fit-personalized":
        sigma2 = args.sigma2 if isinstance(args.sigma2, float) else None
        rule = args.sigma2 if isinstance(args.sigma2, str) else BANDWIDTH_RULE
        return fit_personalized_file(args.input, kernel=args.kernel, sigma2=sigma2, delta=args.delta, lam=args.lam,
                                     folds=args.folds, seed=args.seed, model_out=args.model_out,
                                     bandwidth_rule=rule, zero_one_labels=labels, threads=threads)
    elif command == "predict":
        return predict_file(args.input, model_path=args.model)
    elif command == "simulate":
        return simulate(scenario=args.scenario, method=args.method, n_train=args.n, reps=args.reps,
                        seed=args.seed, config=_simulation_config(args), threads=threads)
    elif command == "sensitivity-delta":
        return sensitivity_delta(scenario=args.scenario, n_train=args.n, seed=args.seed,
                                 config=_simulation_config(args), method=args.method, deltas=args.deltas)
    elif command == "demo-inconsistency":
        return demo_inconsistency(deltas=args.deltas)
    elif command == "compare":
        return compare_file(args.input, n_train=args.n_train, reps=args.reps, seed=args.seed,
                            config=_simulation_config(args), threads=threads, zero_one_labels=labels)
    elif command == "trend":
        return trend(scenario=args.scenario, sizes=args.sizes, reps=args.reps, seed=args.seed,
                     config=_simulation_config(args), method=args.method, threads=threads)
    elif command == "validate":
        return validate_file(args.input, zero_one_labels=labels)
    raise ValueError(f"Неизвестная команда {command}")


def _format(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(v) for v in value) if len(value) <= 8 else f"[{len(value)} знач.]"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_format(v)}" for k, v in value.items())
    return str(value)


def render(result: dict) -> str:
    """Человекочитаемый вид: таблица строк или пары параметр/значение"""
    rows = result.get("rows") or result.get("predictions")
    if rows:
        columns = list(dict.fromkeys(key for row in rows for key in row))
        table = PrettyTable(columns)
        for row in rows:
            table.add_row([_format(row.get(c)) for c in columns])
        return table.get_string()
    table = PrettyTable(["параметр", "значение"])
    table.align = "l"
    for key, value in result.items():
        if key in ("replications", "cv_table"):
            value = f"[{len(value)} строк, см. --json]"
        table.add_row([key, _format(value)])
    return table.get_string()


def _save_output(path: str, report: dict) -> None:
    result = report["result"]
    if Path(path).suffix.lower() == ".csv":
        rows = result.get("rows") or result.get("predictions") or result.get("replications") or [result]
        db.write_rows(path, rows)
    else:
        db.save_json(path, report)


def run_cli(argv: list[str] | None = None) -> int:
    """Точка входа CLI; возвращает код выхода 0, 1 или 2"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()
    run_config = RunConfig.from_args(args)
    try:
        result = process_command(args)
    except McidError as e:
        print(f"Ошибка: {e}", file=sys.stderr)
        return e.exit_code

    report = db.build_report(args.command, result, run_config.as_dict())
    if args.output:
        _save_output(args.output, report)
    if args.json:
        print(json.dumps(report, ensure_ascii=False, indent=2, default=str))
    elif args.command in CSV_COMMANDS and not args.table:
        print(db.rows_to_csv(result["rows"]), end="")
    else:
        print(render(result))
    if args.command == "validate" and not result["valid"]:
        return 2
    return 0
