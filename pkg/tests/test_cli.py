import json
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = REPO / "scenarios"


def _run(*args):
    return subprocess.run(
        [sys.executable, "-m", "trustee_sim.cli", *args],
        capture_output=True, text=True, cwd=REPO,
    )


def test_honest_scenario_exit_zero(tmp_path):
    out = tmp_path / "report.json"
    result = _run("run", "--config", str(SCENARIOS / "honest_3bidders.json"), "--out", str(out))
    assert result.returncode == 0, result.stderr
    assert "expectations met" in result.stdout
    report = json.loads(out.read_text())
    assert report["schema"] == "trustee-sim/1"
    assert report["final_phase"] == "Revealed"
    assert report["winner_index"] == 2
    assert report["price"] == 7


def test_every_shipped_scenario_meets_its_expectations(tmp_path):
    for config in sorted(SCENARIOS.glob("*.json")):
        result = _run("run", "--config", str(config), "--out", str(tmp_path / config.name))
        assert result.returncode == 0, (config.name, result.stdout, result.stderr)


def test_expectation_mismatch_exit_one(tmp_path):
    doc = json.loads((SCENARIOS / "honest_3bidders.json").read_text())
    doc["expect"]["price"] = 9999
    config = tmp_path / "wrong.json"
    config.write_text(json.dumps(doc))
    result = _run("run", "--config", str(config), "--out", str(tmp_path / "r.json"))
    assert result.returncode == 1
    assert "expectation failed" in result.stderr


def test_missing_config_exit_two(tmp_path):
    result = _run("run", "--config", str(tmp_path / "absent.json"))
    assert result.returncode == 2
    assert "error:" in result.stderr


def test_invalid_config_exit_two(tmp_path):
    config = tmp_path / "broken.json"
    config.write_text("{not json")
    assert _run("run", "--config", str(config)).returncode == 2
    config.write_text(json.dumps({"schema": "trustee-sim/1", "seed": 1}))
    assert _run("run", "--config", str(config)).returncode == 2


def test_reports_are_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    _run("run", "--config", str(SCENARIOS / "eclipse.json"), "--out", str(first))
    _run("run", "--config", str(SCENARIOS / "eclipse.json"), "--out", str(second))
    assert first.read_bytes() == second.read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    base, seeded = tmp_path / "a.json", tmp_path / "b.json"
    _run("run", "--config", str(SCENARIOS / "honest_3bidders.json"), "--out", str(base))
    result = _run("run", "--config", str(SCENARIOS / "honest_3bidders.json"),
                  "--seed", "12345", "--out", str(seeded))
    assert result.returncode == 0  # outcome expectations still hold under any seed
    a, b = json.loads(base.read_text()), json.loads(seeded.read_text())
    assert a["winner_address"] != b["winner_address"]  # different parties entirely
    assert (a["winner_index"], a["price"]) == (b["winner_index"], b["price"])


def test_report_to_stdout_without_out_flag():
    result = _run("run", "--config", str(SCENARIOS / "honest_3bidders.json"))
    assert result.returncode == 0
    payload = result.stdout[: result.stdout.index("\nscenario=") + 1]
    report = json.loads(payload)
    assert report["final_phase"] == "Revealed"


def test_vectors_deterministic_and_created(tmp_path):
    out = tmp_path / "deep" / "vectors"
    result = _run("vectors", "--out", str(out))
    assert result.returncode == 0
    files = sorted(out.glob("*.json"))
    assert len(files) >= 10
    again = tmp_path / "again"
    _run("vectors", "--out", str(again))
    for path in files:
        assert (again / path.name).read_bytes() == path.read_bytes()
