import logging

from mcid_hub.simulation.storage import ReportStorage


def test_record_run_replaces_same_id(tmp_path):
    storage = ReportStorage(tmp_path / "history.json")
    summary = {"scenario": "pop1", "method": "population", "n_train": 250, "base_seed": 0, "mean_mce": 0.3}
    first = storage.record_run("simulate", summary)
    second = storage.record_run("simulate", summary | {"mean_mce": 0.28})
    assert first == second == "simulate_pop1_population_250_0"
    history = storage.history()
    assert len(history) == 1
    assert history[0]["summary"]["mean_mce"] == 0.28


def test_different_runs_accumulate(tmp_path):
    storage = ReportStorage(tmp_path / "history.json")
    storage.record_run("simulate", {"scenario": "pop1", "n_train": 250})
    storage.record_run("simulate", {"scenario": "pop1", "n_train": 1000})
    assert [h["summary"]["n_train"] for h in storage.history()] == [250, 1000]


def test_broken_history_starts_over(tmp_path, caplog):
    path = tmp_path / "history.json"
    path.write_text("[{", encoding="utf-8")
    storage = ReportStorage(path)
    with caplog.at_level(logging.WARNING, logger="mcid.simulation"):
        assert storage.history() == []
    assert "сломан" in caplog.text
    storage.record_run("compare", {"method": "population"})
    assert len(storage.history()) == 1
