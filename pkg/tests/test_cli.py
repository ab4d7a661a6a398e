import json

import pytest

from mcid_hub.cli.interface import render, run_cli
from mcid_hub.infra.database import DatabaseManager

TOY_CSV = "x,y\n1,1\n2,1\n0,-1\n"


class _MemoryStorage:
    runs: list = []

    def __init__(self, history_path):
        self.history_path = history_path

    def record_run(self, kind, summary):
        self.runs.append((kind, summary))
        return kind


@pytest.fixture(autouse=True)
def quiet(monkeypatch):
    monkeypatch.setattr("mcid_hub.cli.interface.setup_logging", lambda: None)
    _MemoryStorage.runs = []
    monkeypatch.setattr("mcid_hub.core.usecases.ReportStorage", _MemoryStorage)


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_fit_population_json(write_csv, capsys):
    assert run_cli(["fit-population", str(write_csv(TOY_CSV)), "--json"]) == 0
    report = _json(capsys)
    assert report["schema_version"] == 1
    assert report["kind"] == "fit-population"
    assert report["result"]["c_hat"] == 1.0
    assert report["config"]["params"]["seed"] == 0


def test_fit_population_table(write_csv, capsys):
    assert run_cli(["fit-population", str(write_csv(TOY_CSV))]) == 0
    out = capsys.readouterr().out
    assert "c_hat" in out and "параметр" in out


def test_zero_one_labels_flag(write_csv, capsys):
    path = write_csv("x,y\n1,1\n2,1\n0,0\n")
    assert run_cli(["fit-population", str(path), "--zero-one-labels", "--json"]) == 0
    assert _json(capsys)["result"]["c_hat"] == 1.0


def test_fit_weighted_and_np(write_csv, capsys):
    path = str(write_csv("x,y\n0,-1\n1,1\n2,-1\n3,1\n"))
    assert run_cli(["fit-weighted", path, "--w", "0.9", "--json"]) == 0
    assert _json(capsys)["result"]["c_hat"] == 1.0
    assert run_cli(["fit-np", path, "--alpha", "0.5", "--json"]) == 0
    assert _json(capsys)["result"]["mode"] == "neyman_pearson"


def test_bad_weight_exit_code(write_csv, capsys):
    assert run_cli(["fit-weighted", str(write_csv(TOY_CSV)), "--w", "1.5"]) == 2
    assert "Ошибка" in capsys.readouterr().err


def test_malformed_csv(write_csv, capsys):
    assert run_cli(["fit-population", str(write_csv("x,y\n1,1\nabc,1\n"))]) == 2
    assert "строка 3" in capsys.readouterr().err


def test_missing_argument_is_usage_error(write_csv):
    with pytest.raises(SystemExit) as info:
        run_cli(["fit-weighted", str(write_csv(TOY_CSV))])
    assert info.value.code == 2


def test_degenerate_folds_exit_code(write_csv, capsys):
    path = write_csv("x,y,z1\n0,1,0\n1,-1,1\n2,1,2\n3,-1,3\n")
    assert run_cli(["fit-personalized", str(path), "--lambda", "cv"]) == 1
    assert "Ошибка" in capsys.readouterr().err


def test_personalized_model_then_predict(tmp_path, pers1_train, capsys):
    data = tmp_path / "train.csv"
    model = tmp_path / "model.json"
    DatabaseManager().write_dataset(data, pers1_train)
    code = run_cli(["fit-personalized", str(data), "--lambda", "0.1", "--model-out", str(model), "--json"])
    assert code == 0
    result = _json(capsys)["result"]
    assert result["lam"] == 0.1
    assert len(result["linear_coefficients"]) == 2
    assert model.exists()

    assert run_cli(["predict", str(data), "--model", str(model), "--json"]) == 0
    predictions = _json(capsys)["result"]["predictions"]
    assert len(predictions) == len(pers1_train)
    assert predictions[0]["c_hat"] == pytest.approx(result["b"] + sum(
        beta * z for beta, z in zip(result["linear_coefficients"], pers1_train.z[0])))


def test_predict_with_broken_model(tmp_path, write_csv, capsys):
    model = tmp_path / "model.json"
    model.write_text("{}", encoding="utf-8")
    assert run_cli(["predict", str(write_csv("z1\n1\n")), "--model", str(model)]) == 2


def test_simulate_records_run_and_writes_csv(tmp_path, capsys):
    out = tmp_path / "reps.csv"
    args = ["simulate", "--scenario", "pop1", "--n", "50", "--reps", "2", "--n-test", "100",
            "--threads", "1", "--output", str(out), "--json"]
    assert run_cli(args) == 0
    result = _json(capsys)["result"]
    assert result["reps"] == 2
    assert len(_MemoryStorage.runs) == 1
    assert out.read_text(encoding="utf-8").splitlines()[0].startswith("rep,seed,c_hat")


def test_validate_reports_bad_labels(write_csv, capsys):
    assert run_cli(["validate", str(write_csv("x,y\n1,0\n2,1\n"))]) == 2
    assert "NonBinaryLabelError" in capsys.readouterr().out
    assert run_cli(["validate", str(write_csv(TOY_CSV, "ok.csv")), "--json"]) == 0
    assert _json(capsys)["result"]["valid"] is True


def test_output_json_file(write_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run_cli(["fit-population", str(write_csv(TOY_CSV)), "--output", str(out)]) == 0
    saved = json.loads(out.read_text(encoding="utf-8"))
    assert saved["result"]["c_hat"] == 1.0
    assert "data_path" in saved["config"]["settings"]


def test_render_rows():
    text = render({"rows": [{"loss": "hinge", "gap": 0.35}, {"loss": "psi", "gap": 0.26, "extra": 1}]})
    assert "hinge" in text and "extra" in text


def test_sensitivity_delta_prints_csv(capsys):
    args = ["sensitivity-delta", "--n", "60", "--n-test", "100", "--lambda", "0.1", "--deltas", "0.1,0.5"]
    assert run_cli(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("delta,lambda,b,beta1,beta2")
    assert len(lines) == 3
    assert run_cli(args + ["--table"]) == 0
    assert "test_mce" in capsys.readouterr().out.splitlines()[1]


def test_demo_inconsistency_table_flag(capsys):
    assert run_cli(["demo-inconsistency"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "loss,minimizer,c_star,gap"
    assert lines[1].startswith("zero_one,")
    assert run_cli(["demo-inconsistency", "--table"]) == 0
    assert capsys.readouterr().out.startswith("+")
