"""Expand device macros into primitive linear elements."""

from collections.abc import Iterable
from dataclasses import replace
import logging
import math

from .base.circuit import (
    BjtPi,
    Circuit,
    Element,
    ISource,
    LinearCircuit,
    OpAmp,
    Resistor,
    Vccs,
    Vcvs,
    VSource,
)
from .base.errors import InvalidMacroParams
from .config.topology import ElementKind
from .const import GROUND, THEVENIN_NODE_SUFFIX

_LOGGER = logging.getLogger(__name__)


def thevenin_node(opamp_name: str) -> str:
    """Return the internal node between the op-amp gain and its rout."""
    return f"{opamp_name}{THEVENIN_NODE_SUFFIX}"


def _require_positive(name: str, **values: float) -> None:
    for key, value in values.items():
        if math.isnan(value) or value <= 0 or math.isinf(value):
            raise InvalidMacroParams(name, f"{key} must be positive, got {value}")


def expand_bjt(q: BjtPi) -> list[Element]:
    """Return r_pi (b-e), g_m v_pi (c->e) and r_o (c-e) for a transistor."""
    _require_positive(q.name, gm=q.gm, rpi=q.rpi, ro=q.ro)
    return [
        Resistor(f"{q.name}_rpi", q.base, q.emitter, q.rpi),
        Vccs(f"{q.name}_gm", q.collector, q.emitter, q.base, q.emitter, q.gm),
        Resistor(f"{q.name}_ro", q.collector, q.emitter, q.ro),
    ]


def expand_opamp(a: OpAmp) -> list[Element]:
    """Return the Thevenin equivalent K v_diff behind rout, rin when finite."""
    _require_positive(a.name, rout=a.rout)
    if math.isnan(a.K) or math.isinf(a.K) or a.K < 0:
        raise InvalidMacroParams(a.name, f"K must be finite and >= 0, got {a.K}")
    if math.isnan(a.rin) or a.rin <= 0:
        raise InvalidMacroParams(a.name, f"rin must be positive, got {a.rin}")
    node = thevenin_node(a.name)
    expanded: list[Element] = [
        Vcvs(f"{a.name}_k", node, GROUND, a.plus, a.minus, a.K),
        Resistor(f"{a.name}_rout", node, a.out, a.rout),
    ]
    if not math.isinf(a.rin):
        expanded.append(Resistor(f"{a.name}_rin", a.plus, a.minus, a.rin))
    return expanded


def linearize(circuit: Circuit) -> LinearCircuit:
    """Replace every macro by its small-signal primitives."""
    elements: list[Element] = []
    provenance: dict[str, str] = {}
    for elem in circuit.elements:
        match elem:
            case BjtPi():
                expanded = expand_bjt(elem)
            case OpAmp():
                expanded = expand_opamp(elem)
            case _:
                elements.append(elem)
                continue
        for primitive in expanded:
            provenance[primitive.name] = elem.name
        elements.extend(expanded)

    _LOGGER.debug(
        "%s: Linearized %d elements into %d primitives",
        circuit.title or "<circuit>",
        len(circuit.elements),
        len(elements),
    )
    return LinearCircuit(
        elements=tuple(elements),
        provenance=provenance,
        annotations=circuit.annotations,
        title=circuit.title,
    )


def zero_sources(lc: LinearCircuit) -> LinearCircuit:
    """Short every voltage source and open every current source."""
    zeroed: list[Element] = []
    for elem in lc.elements:
        if isinstance(elem, VSource):
            zeroed.append(VSource(elem.name, elem.plus, elem.minus, 0.0))
        elif isinstance(elem, ISource):
            continue
        else:
            zeroed.append(elem)
    return lc.with_elements(zeroed)


def zero_gains(lc: LinearCircuit) -> LinearCircuit:
    """Set every controlled source gain to zero, leaving the passive skeleton."""
    zeroed: list[Element] = []
    for elem in lc.elements:
        if isinstance(elem, Vcvs):
            zeroed.append(replace(elem, gain=0.0))
        elif isinstance(elem, Vccs):
            zeroed.append(replace(elem, siemens=0.0))
        else:
            zeroed.append(elem)
    return lc.with_elements(zeroed)


def restrict(lc: LinearCircuit, names: Iterable[str]) -> LinearCircuit:
    """Keep only the primitives of the named elements, macros included."""
    wanted = set(names)
    kept = [e for e in lc.elements if e.name in wanted or lc.origin(e.name) in wanted]
    return lc.with_elements(kept)


def feedback_network(lc: LinearCircuit) -> LinearCircuit:
    """Return the feedback network declared by the port annotations."""
    return restrict(lc, lc.annotations.feedback_elements)


def non_passive(lc: LinearCircuit) -> list[str]:
    """Return the names of the elements that are not resistors."""
    return [e.name for e in lc.elements if e.kind != ElementKind.RESISTOR]
