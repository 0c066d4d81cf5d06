"""Config setup for the cross check tolerances."""

from collections.abc import Mapping
from dataclasses import asdict, dataclass
from typing import Any, Self

import voluptuous as vol

from ..base.errors import ConfigError
from ..const import (
    DEFAULT_CLOSED_FORM_TOLERANCE_CASE1,
    DEFAULT_CLOSED_FORM_TOLERANCE_CASE2,
    DEFAULT_DOMINANCE_RATIO,
    DEFAULT_ENGINE_TOLERANCE,
    DEFAULT_ENUMERATION_CAP,
    TOLERANCES_SCHEMA,
)
from .engine_names import FeedbackCase


@dataclass(frozen=True)
class Tolerances:
    """Tolerances decide the verdict of a cross check."""

    engine_tolerance: float = DEFAULT_ENGINE_TOLERANCE
    closed_form_tolerance_case1: float = DEFAULT_CLOSED_FORM_TOLERANCE_CASE1
    closed_form_tolerance_case2: float = DEFAULT_CLOSED_FORM_TOLERANCE_CASE2
    dominance_ratio: float = DEFAULT_DOMINANCE_RATIO
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> Self:
        """Validate a mapping of tolerance overrides."""
        try:
            return cls(**TOLERANCES_SCHEMA(dict(config)))
        except vol.Invalid as err:
            raise ConfigError(f"invalid tolerances: {err}") from err

    def closed_form_tolerance(self, case: FeedbackCase) -> float:
        """Return the allowed closed form versus exact error for the case."""
        if case == FeedbackCase.COLLECTOR_OUTPUT:
            return self.closed_form_tolerance_case1
        return self.closed_form_tolerance_case2

    def as_dict(self) -> dict[str, float]:
        """Return the fields as a plain dict."""
        return asdict(self)
