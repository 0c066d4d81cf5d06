"""Config setup for one command line invocation."""

import argparse
from collections.abc import Mapping
from dataclasses import dataclass, field
import os
from typing import Any, Self

import voluptuous as vol

from ..base.errors import ConfigError
from ..const import (
    CLI_CONFIG_SCHEMA,
    CONF_FORMAT,
    CONF_SUBCOMMAND,
    ENV_OUTPUT_FORMAT,
)
from .engine_names import OutputFormat


def parse_setting(text: str) -> tuple[str, str]:
    """Split a name=value override."""
    name, sep, value = text.partition("=")
    if not sep or not name.strip() or not value.strip():
        raise ConfigError(f"expected name=value, got {text!r}")
    return name.strip(), value.strip()


@dataclass(frozen=True)
class CliConfig:
    """CliConfig is the validated form of the command line."""

    subcommand: str
    output_format: OutputFormat = OutputFormat.TABLE
    netlist: str | None = None
    inline: str | None = None
    port: tuple[str, str] | None = None
    all_engines: bool = False
    case: int | None = None
    typical_defaults: bool = False
    params_file: str | None = None
    settings: tuple[tuple[str, str], ...] = ()
    tolerances: dict[str, str] = field(default_factory=dict)
    axis: str | None = None
    values: tuple[str, ...] = ()
    verbose: int = 0

    @classmethod
    def from_args(
        cls, args: argparse.Namespace, environ: Mapping[str, str] | None = None
    ) -> Self:
        """Validate parsed arguments, the format flag wins over the environment."""
        environ = os.environ if environ is None else environ
        raw: dict[str, Any] = {CONF_SUBCOMMAND: args.subcommand}
        chosen = args.format or environ.get(ENV_OUTPUT_FORMAT)
        if chosen:
            raw[CONF_FORMAT] = chosen
        try:
            data = CLI_CONFIG_SCHEMA(raw)
        except vol.Invalid as err:
            raise ConfigError(f"invalid command line: {err}") from err

        tolerances = {
            key: value
            for key, value in (
                ("engine_tolerance", getattr(args, "engine_tolerance", None)),
                ("closed_form_tolerance_case1", getattr(args, "tolerance_case1", None)),
                ("closed_form_tolerance_case2", getattr(args, "tolerance_case2", None)),
                ("dominance_ratio", getattr(args, "dominance_ratio", None)),
            )
            if value is not None
        }
        port = getattr(args, "port", None)
        return cls(
            subcommand=data[CONF_SUBCOMMAND],
            output_format=data[CONF_FORMAT],
            netlist=getattr(args, "netlist", None),
            inline=getattr(args, "inline", None),
            port=tuple(port) if port else None,  # type: ignore[arg-type]
            all_engines=getattr(args, "all_engines", False),
            case=getattr(args, "case", None),
            typical_defaults=getattr(args, "typical_defaults", False),
            params_file=getattr(args, "params", None),
            settings=tuple(parse_setting(s) for s in getattr(args, "set", None) or ()),
            tolerances=tolerances,
            axis=getattr(args, "axis", None),
            values=tuple(getattr(args, "values", None) or ()),
            verbose=args.verbose,
        )
