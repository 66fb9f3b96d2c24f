import queue

import pytest

import run_scans
from etpa.errors import DomainError
from etpa.scan import read_csv


def test_preset_settings_match_the_cli():
    settings = run_scans.preset_settings("fig4-weak", jobs=2)
    assert settings["command"] == "crossover"
    assert settings["bandwidth_m"] == 1.5
    assert settings["jobs"] == 2
    assert settings["quiet"] is True


def test_run_preset_writes_named_table(tmp_path):
    path = run_scans.run_preset("fig2", str(tmp_path), jobs=1)
    assert path == str(tmp_path / "fig2.csv")
    result = read_csv(path)
    assert len(result.frame) == 50
    assert result.provenance["preset"] == "fig2"


def test_worker_reports_progress_and_completion(tmp_path):
    messages = queue.Queue()
    run_scans.run_preset_worker("fig2", str(tmp_path), 1, messages)
    received = []
    while not messages.empty():
        received.append(messages.get())
    assert received[-1] == ("DONE", str(tmp_path / "fig2.csv"))
    assert ("PROGRESS", 100) in received


def test_worker_reports_errors(tmp_path, monkeypatch):
    def fails(*args):
        raise DomainError("bad grid")

    monkeypatch.setattr(run_scans, "run_preset", fails)
    messages = queue.Queue()
    run_scans.run_preset_worker("fig2", str(tmp_path), 1, messages)
    assert messages.get() == ("ERROR", "fig2: bad grid")


def test_failed_presets_are_returned(tmp_path, monkeypatch):
    def run_preset(name, output_dir=None, jobs=None):
        if name == "fig3a":
            raise ArithmeticError("no convergence")
        return f"{output_dir}/{name}.csv"

    monkeypatch.setattr(run_scans, "run_preset", run_preset)
    assert run_scans.run_presets(["fig2", "fig3a"], str(tmp_path)) == ["fig3a"]
    assert run_scans.main(["fig3a", "--output-dir", str(tmp_path)]) == 3


def test_unknown_preset_is_rejected():
    with pytest.raises(SystemExit) as info:
        run_scans.main(["fig99"])
    assert info.value.code == 2
