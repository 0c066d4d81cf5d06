"""Config setup for the amplifier parameters of the feedback stages."""

from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields, replace
import math
from typing import Any, Self

import voluptuous as vol

from ..base.errors import ConfigError
from ..const import (
    AMPLIFIER_PARAMS_SCHEMA,
    CONF_BETA,
    CONF_G_M,
    CONF_K,
    CONF_R1,
    CONF_R2,
    CONF_R_O,
    CONF_R_OUT,
    CONF_R_PI,
    PARAM_ALIASES,
)

REQUIRED_PARAMS = (CONF_K, CONF_R_OUT, CONF_R1, CONF_R2, CONF_R_PI, CONF_R_O)


def canonical_param_name(name: str) -> str:
    """Map a parameter spelling (rout, rpi, gm, ...) to its field name."""
    if name in _FIELD_NAMES or name == CONF_BETA:
        return name
    lowered = name.lower()
    if lowered in PARAM_ALIASES:
        return PARAM_ALIASES[lowered]
    if lowered == CONF_BETA:
        return CONF_BETA
    raise ConfigError(f"unknown amplifier parameter {name!r}")


@dataclass(frozen=True)
class AmplifierParams:
    """AmplifierParams holds the small-signal values of one feedback stage."""

    K: float
    r_out: float
    R1: float
    R2: float
    g_m: float
    r_pi: float
    r_o: float
    R_E: float = 0.0
    R_S: float = 0.0
    R_in: float = math.inf

    @property
    def beta(self) -> float:
        """Return the current gain, always derived from g_m and r_pi."""
        return self.g_m * self.r_pi

    @property
    def branch_source_resistance(self) -> float:
        """Return r_out + r_pi, the resistance in series with the base."""
        return self.r_out + self.r_pi

    @classmethod
    def typical_defaults(cls) -> Self:
        """Return the typical parameter set, beta = 100."""
        return cls.from_config({})

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> Self:
        """Validate a mapping of parameters, aliases and beta included."""
        merged = {canonical_param_name(key): value for key, value in config.items()}
        try:
            data = AMPLIFIER_PARAMS_SCHEMA(merged)
        except vol.Invalid as err:
            raise ConfigError(f"invalid amplifier parameters: {err}") from err
        beta = data.pop(CONF_BETA, None)
        if beta is not None:
            data[CONF_G_M] = beta / data[CONF_R_PI]
        return cls(**data)

    def with_value(self, name: str, value: float) -> Self:
        """Return a copy with one parameter changed and validated."""
        config = self.as_dict()
        config[canonical_param_name(name)] = value
        if canonical_param_name(name) == CONF_BETA:
            config.pop(CONF_G_M)
        return type(self).from_config(config)

    def with_changes(self, **changes: float) -> Self:
        """Return a copy with fields changed without validation."""
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        """Return the fields as a plain dict."""
        return asdict(self)


def missing_params(config: Mapping[str, Any]) -> list[str]:
    """Return the parameters a mapping leaves to the typical defaults."""
    given = {canonical_param_name(key) for key in config}
    missing = [name for name in REQUIRED_PARAMS if name not in given]
    if CONF_G_M not in given and CONF_BETA not in given:
        missing.append(CONF_G_M)
    return missing


_FIELD_NAMES = frozenset(f.name for f in fields(AmplifierParams))
