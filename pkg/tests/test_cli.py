"""
Tests for the command-line surface and the experiment orchestrator.
"""
import io
import json

import pytest

from hermite_nc.cli import main
from hermite_nc.config import validate
from hermite_nc.errors import InputError
from hermite_nc.experiments import KINDS, build_plan, verify_configs
from hermite_nc.orchestrator import emit_summary
from hermite_nc.probes import fit_report
from hermite_nc.types import ExperimentConfig


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


@pytest.mark.integration
def test_identities_run_is_deterministic(tmp_path):
    """Two runs with the same seed write byte-identical results."""
    cfg = _write(tmp_path, "id.toml", 'kind = "identities"\nseed = 3\n[runtime]\nworkers = 2\n')
    out = tmp_path / "a"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    first = {name: (out / name).read_bytes() for name in ("results.csv", "report.json")}
    assert main(["run", str(cfg), "--out", str(out), "--jobs", "1"]) == 0
    for name, data in first.items():
        assert (out / name).read_bytes() == data
    header = (tmp_path / "a" / "results.csv").read_text().splitlines()[0]
    assert header == "experiment,parameters,metric,value"
    summary = json.loads((tmp_path / "a" / "run-summary.json").read_text())
    assert summary["kind"] == "identities"
    assert summary["error"] is None


@pytest.mark.integration
def test_riesz_convergence_writes_plot(tmp_path):
    """A small convergence run passes and writes its SVG curve."""
    cfg = _write(
        tmp_path,
        "rc.toml",
        'kind = "riesz-convergence"\ndegree_cap = 8\nradii = [4.0, 64.0, 4096.0]\np_values = [2.0]\n',
    )
    assert main(["run", str(cfg), "--out", str(tmp_path / "out"), "--seed", "1"]) == 0
    assert (tmp_path / "out" / "plot_riesz_convergence.svg").exists()
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["config"]["seed"] == 1
    assert {r["name"] for r in report["reports"]} == {
        "order-lift",
        "riesz-convergence p=2.0",
        "riesz-convergence-shifted p=2.0",
    }


@pytest.mark.integration
def test_failing_probe_exits_one(tmp_path):
    """The parity symbol fails the Marcinkiewicz condition."""
    cfg = _write(
        tmp_path,
        "mk.toml",
        'kind = "marcinkiewicz"\nmultiplier = "parity"\norder = 1\nn_max = 64\n'
        "p_values = [2.0]\ndegree_caps = [4]\nsamples = 2\nplots = false\n",
    )
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 1
    assert (tmp_path / "out" / "results.csv").exists()


def test_missing_config_exits_two(tmp_path, capsys):
    """A config path that does not exist is a usage error."""
    assert main(["run", str(tmp_path / "nope.toml")]) == 2
    assert "❌" in capsys.readouterr().out


def test_unknown_key_exits_two(tmp_path, capsys):
    """Unknown config keys are rejected with the key named."""
    cfg = _write(tmp_path, "bad.toml", 'kind = "identities"\nbogus = 1\n')
    assert main(["run", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().out


def test_bad_jobs_exits_two(temp_config_file):
    """--jobs must be positive."""
    assert main(["run", str(temp_config_file), "--jobs", "0"]) == 2


def test_unknown_command_exits_two():
    """argparse errors exit with the usage code."""
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_show_config(temp_config_file, capsys):
    """show-config prints the normalized TOML."""
    assert main(["show-config", str(temp_config_file)]) == 0
    out = capsys.readouterr().out
    assert 'kind = "mehler-probe"' in out
    assert "[runtime]" in out


def test_emit_summary():
    """No probes passes; a failed required probe gives exit code 1."""
    stream = io.StringIO()
    assert emit_summary([], stream) == 0
    assert "no probes" in stream.getvalue()
    bad = fit_report("growing", [{"coords": {"R": 1}, "ratio": 1.0}, {"coords": {"R": 2}, "ratio": 50.0}], ["R"], 4.0, {})
    good = fit_report("flat", [{"coords": {"R": 1}, "ratio": 1.0}], ["R"], 4.0, {})
    stream = io.StringIO()
    assert emit_summary([good, bad], stream) == 1
    assert "FAIL" in stream.getvalue()


def test_empty_lattice_is_input_error():
    """A mehler probe without times is refused when planning."""
    with pytest.raises(InputError):
        build_plan(ExperimentConfig(kind="mehler-probe", t_values=[]))


def test_verify_battery_is_valid():
    """Every battery config validates and together they cover every kind."""
    configs = verify_configs(0)
    for cfg in configs:
        validate(cfg)
    assert {c.kind for c in configs} == set(KINDS)
