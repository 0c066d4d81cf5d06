"""Constants for the feedback circuit analysis."""

import math
from pathlib import Path

import voluptuous as vol

from .config.engine_names import OutputFormat
from .util import parse_quantity

GROUND = "0"
FIXTURES_PATH = Path(__file__).parent / "fixtures"

# Synthesized names
THEVENIN_NODE_SUFFIX = "__thev"
TEST_VOLTAGE_SOURCE = "VTEST"
TEST_CURRENT_SOURCE = "ITEST"
INPUT_SHORT_SOURCE = "VSHORT_IN"
OUTPUT_SHORT_SOURCE = "VSHORT_OUT"
SENSE_SOURCE = "XSENSE"

# Environment
ENV_OUTPUT_FORMAT = "FEEDBACK_LENS_FORMAT"

LOG_FORMAT = (
    "%(asctime)s.%(msecs)03d %(levelname)-8s %(threadName)s "
    "%(name)s:%(filename)s:%(lineno)s %(message)s"
)
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Solver limits
RESIDUAL_TOLERANCE = 1e-9
# 1 V across 1e18 Ω and beyond is an open port.
ZERO_CURRENT_TOLERANCE = 1e-18
# Cost for a zero entry in the causal ordering assignment.
ZERO_ENTRY_PENALTY = 1e6
# Iterative refinement stops once a correction is this small against the
# solution, or stops shrinking.
REFINEMENT_TOLERANCE = 1e-30
MAX_REFINEMENT_STEPS = 12

# Amplifier parameters
CONF_K, DEFAULT_K = "K", 1000.0  # forward gain of the prior stages
CONF_R_OUT, DEFAULT_R_OUT = "r_out", 500e3
CONF_R1, DEFAULT_R1 = "R1", 1e3
CONF_R2, DEFAULT_R2 = "R2", 10e3
CONF_G_M, DEFAULT_G_M = "g_m", 0.04
CONF_R_PI, DEFAULT_R_PI = "r_pi", 2.5e3
CONF_R_O, DEFAULT_R_O = "r_o", 100e3
CONF_R_E, DEFAULT_R_E = "R_E", 0.0
CONF_R_S, DEFAULT_R_S = "R_S", 0.0
CONF_R_IN, DEFAULT_R_IN = "R_in", math.inf
CONF_BETA = "beta"

# Command line spellings of the parameters.
PARAM_ALIASES: dict[str, str] = {
    "k": CONF_K,
    "rout": CONF_R_OUT,
    "r1": CONF_R1,
    "r2": CONF_R2,
    "gm": CONF_G_M,
    "rpi": CONF_R_PI,
    "ro": CONF_R_O,
    "re": CONF_R_E,
    "rs": CONF_R_S,
    "rin": CONF_R_IN,
}

# Tolerances
CONF_ENGINE_TOLERANCE, DEFAULT_ENGINE_TOLERANCE = "engine_tolerance", 1e-6
CONF_CLOSED_FORM_TOLERANCE_CASE1, DEFAULT_CLOSED_FORM_TOLERANCE_CASE1 = (
    "closed_form_tolerance_case1",
    0.0055,
)
CONF_CLOSED_FORM_TOLERANCE_CASE2, DEFAULT_CLOSED_FORM_TOLERANCE_CASE2 = (
    "closed_form_tolerance_case2",
    0.0511,
)
CONF_DOMINANCE_RATIO, DEFAULT_DOMINANCE_RATIO = "dominance_ratio", 100.0
CONF_ENUMERATION_CAP, DEFAULT_ENUMERATION_CAP = "enumeration_cap", 10_000

# Command line
CONF_FORMAT, DEFAULT_FORMAT = "format", OutputFormat.TABLE
CONF_SUBCOMMAND = "subcommand"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2


def _quantity(value: object) -> float:
    """Coerce a number or a suffixed string to a float."""
    if isinstance(value, bool):
        raise vol.Invalid("expected a number")
    if isinstance(value, int | float):
        number = float(value)
    elif isinstance(value, str):
        try:
            number = parse_quantity(value)
        except ValueError as err:
            raise vol.Invalid(str(err)) from err
    else:
        raise vol.Invalid("expected a number")
    if math.isnan(number):
        raise vol.Invalid("not a number")
    return number


_POSITIVE = vol.All(
    _quantity, vol.Range(min=0, max=math.inf, min_included=False, max_included=False)
)
_NON_NEGATIVE = vol.All(_quantity, vol.Range(min=0, max=math.inf, max_included=False))
_POSITIVE_OR_INFINITE = vol.All(_quantity, vol.Range(min=0, min_included=False))
_FRACTION = vol.All(_quantity, vol.Range(min=0, max=1))

AMPLIFIER_PARAMS_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_K, default=DEFAULT_K): _NON_NEGATIVE,
        vol.Optional(CONF_R_OUT, default=DEFAULT_R_OUT): _POSITIVE,
        vol.Optional(CONF_R1, default=DEFAULT_R1): _POSITIVE,
        vol.Optional(CONF_R2, default=DEFAULT_R2): _POSITIVE,
        vol.Optional(CONF_G_M, default=DEFAULT_G_M): _POSITIVE,
        vol.Optional(CONF_R_PI, default=DEFAULT_R_PI): _POSITIVE,
        vol.Optional(CONF_R_O, default=DEFAULT_R_O): _POSITIVE,
        vol.Optional(CONF_R_E, default=DEFAULT_R_E): _NON_NEGATIVE,
        vol.Optional(CONF_R_S, default=DEFAULT_R_S): _NON_NEGATIVE,
        vol.Optional(CONF_R_IN, default=DEFAULT_R_IN): _POSITIVE_OR_INFINITE,
        vol.Optional(CONF_BETA): _POSITIVE,
    }
)

TOLERANCES_SCHEMA = vol.Schema(
    {
        vol.Optional(
            CONF_ENGINE_TOLERANCE, default=DEFAULT_ENGINE_TOLERANCE
        ): _FRACTION,
        vol.Optional(
            CONF_CLOSED_FORM_TOLERANCE_CASE1,
            default=DEFAULT_CLOSED_FORM_TOLERANCE_CASE1,
        ): _FRACTION,
        vol.Optional(
            CONF_CLOSED_FORM_TOLERANCE_CASE2,
            default=DEFAULT_CLOSED_FORM_TOLERANCE_CASE2,
        ): _FRACTION,
        vol.Optional(CONF_DOMINANCE_RATIO, default=DEFAULT_DOMINANCE_RATIO): _POSITIVE,
        vol.Optional(CONF_ENUMERATION_CAP, default=DEFAULT_ENUMERATION_CAP): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
    }
)

CLI_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_SUBCOMMAND): vol.In(
            ["check", "classify", "loading", "impedance", "crosscheck", "sweep"]
        ),
        vol.Optional(CONF_FORMAT, default=DEFAULT_FORMAT): vol.All(
            vol.Lower, vol.Coerce(OutputFormat)
        ),
    },
    extra=vol.ALLOW_EXTRA,
)
