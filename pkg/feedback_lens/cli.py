"""Command line front end."""

import argparse
from collections.abc import Callable, Sequence
import json
import logging
from pathlib import Path
import sys
from typing import Any, TextIO

from .base.circuit import Circuit, NodePair
from .base.errors import ConfigError, FeedbackLensError
from .config.amplifier_params import (
    AmplifierParams,
    canonical_param_name,
    missing_params,
)
from .config.cli_config import CliConfig
from .config.engine_names import EngineName, FeedbackCase, OutputFormat
from .config.tolerances import Tolerances
from .config.topology import Validity
from .const import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_REJECTED,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
)
from .crosscheck import mason_impedance, reports_to_json, run_case, sweep
from .feedback import (
    classify_topology,
    closed_form_rx,
    exact_rx,
    loading_effect,
    match_case,
    port_value,
)
from .mna import driving_point_impedance
from .netlist import load_netlist, parse_netlist, validate
from .smallsignal import feedback_network, linearize
from .util import format_engineering, format_ohms

_LOGGER = logging.getLogger(__name__)

Command = Callable[[CliConfig, TextIO], int]


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with every subcommand."""
    parser = argparse.ArgumentParser(
        prog="feedback-lens",
        description="Classify feedback topologies and cross check output impedances.",
    )
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def netlist_command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument("netlist", nargs="?")
        source.add_argument("--inline", metavar="TEXT")
        return sub

    netlist_command("check", "parse and validate a netlist")
    netlist_command("classify", "classify the feedback topology")
    netlist_command("loading", "loading and feedback factor of the feedback network")
    impedance = netlist_command("impedance", "driving point impedance of a port")
    impedance.add_argument("--port", nargs=2, metavar=("PLUS", "MINUS"))
    impedance.add_argument("--all-engines", action="store_true")

    for name, help_text in (
        ("crosscheck", "compare every engine on a verification stage"),
        ("sweep", "cross check over a grid of one parameter"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument(
            "--case", type=int, choices=[int(c) for c in FeedbackCase], required=True
        )
        sub.add_argument(
            "--paper-defaults",
            "--typical-defaults",
            dest="typical_defaults",
            action="store_true",
            help="start from the typical parameter values",
        )
        sub.add_argument("--params", metavar="FILE")
        sub.add_argument("--set", action="append", metavar="NAME=VALUE")
        sub.add_argument("--engine-tolerance")
        sub.add_argument("--tolerance-case1")
        sub.add_argument("--tolerance-case2")
        sub.add_argument("--dominance-ratio")
        if name == "sweep":
            sub.add_argument("--axis", required=True)
            sub.add_argument("--values", nargs="+", required=True)
    return parser


def _read_circuit(config: CliConfig) -> Circuit:
    if config.inline is not None:
        return parse_netlist(config.inline.replace("\\n", "\n"))
    assert config.netlist is not None
    return load_netlist(config.netlist)


def _emit(out: TextIO, config: CliConfig, data: dict[str, Any], table: str) -> None:
    if config.output_format == OutputFormat.JSON:
        out.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
    else:
        out.write(table + "\n")


def _rows(rows: Sequence[tuple[str, str]]) -> str:
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)


def cmd_check(config: CliConfig, out: TextIO) -> int:
    """Parse and validate, findings make the exit code 2."""
    circuit = _read_circuit(config)
    report = validate(circuit)
    findings = [str(f) for f in report]
    _emit(
        out,
        config,
        {"valid": report.is_valid, "findings": findings, "elements": len(circuit)},
        "\n".join(findings) if findings else f"ok, {len(circuit)} elements",
    )
    return EXIT_OK if report.is_valid else EXIT_REJECTED


def cmd_classify(config: CliConfig, out: TextIO) -> int:
    """Print the topology, an irrelevant configuration exits with 2."""
    topology = classify_topology(_read_circuit(config))
    _emit(
        out,
        config,
        {
            "input_mix": str(topology.input_mix),
            "output_sense": str(topology.output_sense),
            "validity": str(topology.validity),
        },
        str(topology),
    )
    return EXIT_OK if topology.validity == Validity.VALID else EXIT_REJECTED


def cmd_loading(config: CliConfig, out: TextIO) -> int:
    """Print R_if, R_of and f of the annotated feedback network."""
    circuit = _read_circuit(config)
    topology = classify_topology(circuit)
    loading = loading_effect(feedback_network(linearize(circuit)), topology)
    _emit(
        out,
        config,
        {
            "topology": topology.label,
            "R_if": loading.R_if,
            "R_of": loading.R_of,
            "f": loading.f,
        },
        _rows(
            [
                ("topology", str(topology)),
                ("R_if", format_ohms(loading.R_if)),
                ("R_of", format_ohms(loading.R_of)),
                ("f", format_engineering(loading.f)),
            ]
        ),
    )
    return EXIT_OK


def _port(config: CliConfig, circuit: Circuit) -> NodePair:
    if config.port is not None:
        return config.port
    if circuit.annotations.output_port is not None:
        return circuit.annotations.output_port
    raise FeedbackLensError("no --port given and the netlist has no .output port")


def cmd_impedance(config: CliConfig, out: TextIO) -> int:
    """Print the MNA impedance of a port, optionally every engine."""
    circuit = _read_circuit(config)
    port = _port(config, circuit)
    lc = linearize(circuit)
    values: dict[str, float] = {
        str(EngineName.MNA): driving_point_impedance(lc, port)
    }
    if config.all_engines:
        values[str(EngineName.MASON)] = mason_impedance(lc, port)
        matched = match_case(circuit)
        if matched is not None and port == circuit.annotations.output_port:
            case, params = matched
            values[str(EngineName.CLOSED_FORM)] = port_value(
                closed_form_rx(case, params), circuit, params.R2
            )
            values[str(EngineName.EXACT_FORMULA)] = port_value(
                exact_rx(case, params), circuit, params.R2
            )
    if len(values) == 1:
        table = format_ohms(values[str(EngineName.MNA)])
    else:
        table = _rows([(name, format_ohms(value)) for name, value in values.items()])
    _emit(out, config, {"port": list(port), "values": values}, table)
    return EXIT_OK


def _params(config: CliConfig) -> AmplifierParams:
    """Typical values when asked for, then the params file, then each --set.

    Without --paper-defaults the params file has to name every parameter.
    """
    merged: dict[str, Any] = {}
    if config.typical_defaults:
        merged.update(AmplifierParams.typical_defaults().as_dict())
    if config.params_file is not None:
        loaded = json.loads(Path(config.params_file).read_text(encoding="utf-8"))
        if not isinstance(loaded, dict):
            raise FeedbackLensError(f"{config.params_file}: expected a JSON object")
        merged.update({canonical_param_name(k): v for k, v in loaded.items()})
    missing = missing_params(merged)
    if missing:
        raise ConfigError(
            f"missing amplifier parameters {', '.join(missing)}, "
            "pass --paper-defaults or a complete --params file"
        )
    params = AmplifierParams.from_config(merged)
    for name, value in config.settings:
        params = params.with_value(name, value)  # type: ignore[arg-type]
    return params


def cmd_crosscheck(config: CliConfig, out: TextIO) -> int:
    """Print one cross check report, a failing verdict exits with 2."""
    assert config.case is not None
    report = run_case(
        FeedbackCase(config.case),
        _params(config),
        Tolerances.from_config(config.tolerances),
    )
    if config.output_format == OutputFormat.JSON:
        out.write(report.to_json() + "\n")
    else:
        out.write(report.to_table() + "\n")
    return EXIT_OK if report.passed else EXIT_REJECTED


def cmd_sweep(config: CliConfig, out: TextIO) -> int:
    """Print a report per grid value, any failing verdict exits with 2."""
    assert config.case is not None and config.axis is not None
    reports = sweep(
        FeedbackCase(config.case),
        _params(config),
        config.axis,
        config.values,  # type: ignore[arg-type]
        Tolerances.from_config(config.tolerances),
    )
    if config.output_format == OutputFormat.JSON:
        out.write(reports_to_json(reports) + "\n")
    else:
        out.write("\n\n".join(r.to_table() for r in reports) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_REJECTED


COMMANDS: dict[str, Command] = {
    "check": cmd_check,
    "classify": cmd_classify,
    "loading": cmd_loading,
    "impedance": cmd_impedance,
    "crosscheck": cmd_crosscheck,
    "sweep": cmd_sweep,
}


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT, stream=sys.stderr
    )


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    """Run one subcommand and return its exit code."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_ERROR
    try:
        config = CliConfig.from_args(args)
        _configure_logging(config.verbose)
        return COMMANDS[config.subcommand](config, out)
    except (FeedbackLensError, OSError, ValueError) as err:
        _LOGGER.error("%s: %s", args.subcommand, err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
