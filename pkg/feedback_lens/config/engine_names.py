"""The names of the engines and report pieces."""

from enum import IntEnum, StrEnum


class EngineName(StrEnum):
    """The engines that compute an output impedance."""

    CLOSED_FORM = "closed_form"
    EXACT_FORMULA = "exact_formula"
    MASON = "mason"
    MNA = "mna"


# The engines that solve the same linear system exactly.
EXACT_ENGINES = (EngineName.EXACT_FORMULA, EngineName.MASON, EngineName.MNA)


class Verdict(StrEnum):
    """The outcome of a cross check."""

    PASS = "pass"
    FAIL = "fail"


class OutputFormat(StrEnum):
    """The report formats of the command line."""

    TABLE = "table"
    JSON = "json"


class FeedbackCase(IntEnum):
    """The series-at-output stages with closed forms."""

    COLLECTOR_OUTPUT = 1  # Output at the collector, R1 from emitter to ground.
    EMITTER_OUTPUT = 2  # Output at the emitter, R1 from collector to ground.
