"""Utility details for the system."""

import logging
import math
import re

_LOGGER = logging.getLogger(__name__)

# Engineering suffixes, case-sensitive ("m" is milli, "M" is mega).
ENGINEERING_SUFFIXES: dict[str, float] = {
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
}

_QUANTITY_RE = re.compile(
    r"^(?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<suffix>[A-Za-z]?)$"
)


def parse_quantity(text: str) -> float:
    """Parse a number with an optional engineering suffix into SI units."""
    token = text.strip()
    if token.lower() in ("inf", "+inf"):
        return math.inf
    match = _QUANTITY_RE.match(token)
    if match is None:
        raise ValueError(f"not a number: {text!r}")
    value = float(match.group("number"))
    suffix = match.group("suffix")
    if suffix:
        if suffix not in ENGINEERING_SUFFIXES:
            raise ValueError(f"unknown suffix {suffix!r} in {text!r}")
        value *= ENGINEERING_SUFFIXES[suffix]
    return value


def is_infinite(value: float) -> bool:
    """If this value is the infinite impedance sentinel."""
    return math.isinf(value) and value > 0


def parallel(*resistances: float) -> float:
    """Parallel combination of resistances, infinite branches are open."""
    conductance = 0.0
    for resistance in resistances:
        if is_infinite(resistance):
            continue
        if resistance == 0:
            return 0.0
        conductance += 1.0 / resistance
    if conductance == 0:
        return math.inf
    return 1.0 / conductance


def relative_difference(a: float, b: float) -> float:
    """Symmetric relative difference |a-b|/max(|a|,|b|)."""
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return math.inf
    return abs(a - b) / max(abs(a), abs(b))


def format_ohms(value: float) -> str:
    """Format an impedance as "6.758e6 Ω"."""
    return f"{format_engineering(value)} Ω"


def format_engineering(value: float) -> str:
    """Format a value with four significant digits and a bare exponent."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    mantissa, exponent = f"{value:.3e}".split("e")
    return f"{mantissa}e{int(exponent)}"

