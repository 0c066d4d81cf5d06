"""Test the command line."""

import argparse
import io
import json
from pathlib import Path

import pytest

from ..base.errors import ConfigError
from ..cli import main
from ..config.cli_config import CliConfig, parse_setting
from ..config.engine_names import OutputFormat
from ..const import ENV_OUTPUT_FORMAT


def run(*argv: str) -> tuple[int, str]:
    """Run the command line and capture what it prints."""
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(name="netlist")
def mock_netlist(fixtures_path: Path):
    """Path of a shipped netlist as a string."""

    def _path(name: str) -> str:
        return str(fixtures_path / name)

    return _path


@pytest.fixture(autouse=True)
def mock_no_format_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep the output format of the environment out of the tests."""
    monkeypatch.delenv(ENV_OUTPUT_FORMAT, raising=False)


@pytest.mark.parametrize(
    ("name", "code", "expected"),
    [
        ("collector_output.net", 0, "series-series (valid)"),
        ("shunt_series.net", 0, "shunt-series (valid)"),
        ("shunt_shunt.net", 0, "shunt-shunt (valid)"),
        ("collector_feedback.net", 2, "shunt-shunt (irrelevant)"),
    ],
)
def test_classify(netlist, name: str, code: int, expected: str) -> None:
    """Test the printed topology and the exit code."""
    assert run("classify", netlist(name)) == (code, expected + "\n")


def test_classify_json(netlist) -> None:
    """Test the machine readable topology."""
    code, text = run("--format", "json", "classify", netlist("emitter_output.net"))
    assert code == 0
    assert json.loads(text) == {
        "input_mix": "series",
        "output_sense": "series",
        "validity": "valid",
    }


def test_malformed_netlist(capsys) -> None:
    """Test a syntax error exits with 1 and names the line."""
    code, text = run("classify", "--inline", "R1 a 0")
    assert code == 1
    assert text == ""
    err = capsys.readouterr().err
    assert "error: <netlist>:1: " in err
    assert "expected 3 fields" in err


def test_missing_file(tmp_path: Path) -> None:
    """Test an unreadable netlist exits with 1."""
    assert run("check", str(tmp_path / "missing.net"))[0] == 1


def test_usage_errors() -> None:
    """Test argument errors exit with 1."""
    assert run()[0] == 1
    assert run("classify")[0] == 1
    assert run("crosscheck", "--typical-defaults")[0] == 1
    assert run("crosscheck", "--case", "3")[0] == 1


@pytest.mark.parametrize(
    ("name", "expected"),
    [
        ("series.net", "3.000e3 Ω"),
        ("collector_output_primitives.net", "6.758e6 Ω"),
        ("emitter_output_primitives.net", "9.570e5 Ω"),
    ],
)
def test_impedance(netlist, name: str, expected: str) -> None:
    """Test the impedance at the annotated output port."""
    assert run("impedance", netlist(name)) == (0, expected + "\n")


def test_impedance_port_and_inline() -> None:
    """Test an explicit port on an inline netlist."""
    code, text = run(
        "impedance", "--inline", "R1 a m 1k\\nR2 m 0 2k", "--port", "m", "0"
    )
    assert (code, text) == (0, "2.000e3 Ω\n")


def test_impedance_needs_a_port() -> None:
    """Test a netlist without an output port and no --port."""
    assert run("impedance", "--inline", "R1 a 0 1k")[0] == 1


def test_impedance_all_engines(netlist) -> None:
    """Test every engine agrees on a recognised stage with its load."""
    code, text = run(
        "--format",
        "json",
        "impedance",
        netlist("collector_output.net"),
        "--all-engines",
    )
    assert code == 0
    data = json.loads(text)
    assert data["port"] == ["c", "0"]
    values = data["values"]
    assert set(values) == {"mna", "mason", "closed_form", "exact_formula"}
    loaded = 1 / (1 / 6_758_132.6904 + 1 / 10e3)
    for engine in ("mna", "mason", "exact_formula"):
        assert values[engine] == pytest.approx(loaded, rel=1e-7)
    assert values["closed_form"] < values["exact_formula"]


def test_impedance_all_engines_table(netlist) -> None:
    """Test the engine table of an unrecognised circuit."""
    code, text = run("impedance", netlist("series.net"), "--all-engines")
    assert code == 0
    assert text.splitlines() == ["mna    3.000e3 Ω", "mason  3.000e3 Ω"]


def test_check(netlist) -> None:
    """Test validation output and exit codes."""
    assert run("check", netlist("series.net")) == (0, "ok, 2 elements\n")
    code, text = run("check", "--inline", "V1 a b 1")
    assert code == 2
    assert "no_ground" in text
    inline = "R1 a 0 1k\\nR2 a 0 2k"
    code, text = run("--format", "json", "check", "--inline", inline)
    assert code == 0
    assert json.loads(text) == {"elements": 2, "findings": [], "valid": True}


def test_loading(netlist) -> None:
    """Test the loading of a divider sensing the output voltage."""
    code, text = run("--format", "json", "loading", netlist("series_shunt.net"))
    assert code == 0
    data = json.loads(text)
    assert data["topology"] == "series-shunt"
    assert data["R_if"] == pytest.approx(900)
    assert data["R_of"] == pytest.approx(10e3)
    assert data["f"] == pytest.approx(0.1)


@pytest.mark.parametrize("case", ["1", "2"])
def test_crosscheck_typical_defaults(case: str) -> None:
    """Test both verification stages pass with the typical values."""
    code, text = run("crosscheck", "--case", case, "--typical-defaults")
    assert code == 0
    assert text.splitlines()[-1].split() == ["verdict", "pass"]


def test_crosscheck_set_and_json() -> None:
    """Test an override and the JSON report."""
    code, text = run(
        "--format",
        "json",
        "crosscheck",
        "--case",
        "2",
        "--typical-defaults",
        "--set",
        "rout=10",
    )
    assert code == 0
    data = json.loads(text)
    assert data["parameters"]["r_out"] == 10.0
    assert data["approximation_error"] < 0.005


def test_crosscheck_env_format(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test the environment picks the format and the flag wins over it."""
    monkeypatch.setenv(ENV_OUTPUT_FORMAT, "json")
    code, text = run("crosscheck", "--case", "1", "--typical-defaults")
    assert code == 0
    assert json.loads(text)["verdict"] == "pass"
    code, text = run(
        "--format", "table", "crosscheck", "--case", "1", "--paper-defaults"
    )
    assert code == 0
    assert text.splitlines()[0].startswith("quantity")


def test_crosscheck_params_file(tmp_path: Path) -> None:
    """Test the params file sits between the defaults and --set."""
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"rout": 10, "R1": 2000}))
    code, text = run(
        "--format",
        "json",
        "crosscheck",
        "--case",
        "2",
        "--paper-defaults",
        "--params",
        str(params),
        "--set",
        "R1=1k",
    )
    assert code == 0
    data = json.loads(text)
    assert data["parameters"]["r_out"] == 10.0
    assert data["parameters"]["R1"] == 1000.0


@pytest.mark.parametrize("case", ["1", "2"])
def test_crosscheck_defaults_flag(case: str) -> None:
    """Test the documented spelling of the defaults flag."""
    code, text = run("crosscheck", "--case", case, "--paper-defaults")
    assert code == 0
    assert text.splitlines()[-1].split() == ["verdict", "pass"]


def test_crosscheck_needs_parameters(tmp_path: Path, capsys) -> None:
    """Test the typical values are only used when asked for."""
    assert run("crosscheck", "--case", "1")[0] == 1
    assert "--paper-defaults" in capsys.readouterr().err
    assert run("crosscheck", "--case", "1", "--set", "rout=10")[0] == 1
    capsys.readouterr()
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"rout": 10, "R1": 2000}))
    assert run("crosscheck", "--case", "2", "--params", str(partial))[0] == 1
    err = capsys.readouterr().err
    assert "R2" in err
    assert "r_out" not in err


def test_crosscheck_complete_params_file(tmp_path: Path) -> None:
    """Test a params file naming every value needs no defaults flag."""
    params = tmp_path / "params.json"
    params.write_text(
        json.dumps(
            {
                "K": 1000,
                "rout": 10,
                "R1": 1000,
                "R2": 10000,
                "rpi": 2500,
                "beta": 100,
                "ro": 100000,
            }
        )
    )
    code, text = run(
        "--format", "json", "crosscheck", "--case", "2", "--params", str(params)
    )
    assert code == 0
    data = json.loads(text)
    assert data["parameters"]["r_out"] == 10.0
    assert data["parameters"]["g_m"] == pytest.approx(0.04)
    assert data["verdict"] == "pass"


def test_crosscheck_tight_tolerance() -> None:
    """Test a failing verdict exits with 2."""
    code, text = run(
        "crosscheck", "--case", "1", "--typical-defaults", "--tolerance-case1", "0.001"
    )
    assert code == 2
    assert "fail" in text


def test_crosscheck_bad_settings() -> None:
    """Test malformed overrides exit with 1."""
    args = ("crosscheck", "--case", "1", "--paper-defaults")
    assert run(*args, "--set", "rout")[0] == 1
    assert run(*args, "--set", "bogus=1")[0] == 1
    assert run(*args, "--set", "rout=-5")[0] == 1
    assert run(*args, "--engine-tolerance", "x")[0] == 1


def test_sweep() -> None:
    """Test a sweep prints one report per value."""
    code, text = run(
        "--format",
        "json",
        "sweep",
        "--case",
        "2",
        "--typical-defaults",
        "--axis",
        "rout",
        "--values",
        "10",
        "1k",
    )
    assert code == 0
    data = json.loads(text)
    assert [r["parameters"]["r_out"] for r in data] == [10.0, 1000.0]
    assert all(r["verdict"] == "pass" for r in data)


def test_parse_setting() -> None:
    """Test splitting name=value overrides."""
    assert parse_setting(" rout = 10k ") == ("rout", "10k")
    with pytest.raises(ConfigError):
        parse_setting("=3")


def test_cli_config_format() -> None:
    """Test the format flag, the environment and the default."""
    args = argparse.Namespace(subcommand="check", format=None, verbose=0)
    assert CliConfig.from_args(args, {}).output_format == OutputFormat.TABLE
    env = {ENV_OUTPUT_FORMAT: "JSON"}
    assert CliConfig.from_args(args, env).output_format == OutputFormat.JSON
    flagged = argparse.Namespace(subcommand="check", format="table", verbose=0)
    assert CliConfig.from_args(flagged, env).output_format == OutputFormat.TABLE
    with pytest.raises(ConfigError):
        CliConfig.from_args(args, {ENV_OUTPUT_FORMAT: "xml"})
