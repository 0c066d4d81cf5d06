"""The various enums for the feedback topology."""

from enum import StrEnum


class Connection(StrEnum):
    """How the feedback network meets a port of the forward amplifier."""

    SERIES = "series"  # In the port loop, mixes voltage or senses current.
    SHUNT = "shunt"  # Across the port nodes, mixes current or senses voltage.


class Validity(StrEnum):
    """If the feedback configuration is one worth analysing."""

    VALID = "valid"
    IRRELEVANT = "irrelevant"  # Feedback returned to an output collector.


class ElementKind(StrEnum):
    """The kinds of elements a netlist can hold."""

    RESISTOR = "resistor"
    VSOURCE = "vsource"
    ISOURCE = "isource"
    VCVS = "vcvs"
    VCCS = "vccs"
    BJT_PI = "bjt_pi"
    OPAMP = "opamp"


class FindingCode(StrEnum):
    """The validation findings for a circuit."""

    NO_GROUND = "no_ground"
    FLOATING_NODE = "floating_node"
    DUPLICATE_NAME = "duplicate_name"
    UNKNOWN_NODE = "unknown_node"
    UNKNOWN_FEEDBACK_ELEMENT = "unknown_feedback_element"
    SAME_PORTS = "same_ports"
    NON_POSITIVE_VALUE = "non_positive_value"
    NON_FINITE_VALUE = "non_finite_value"
