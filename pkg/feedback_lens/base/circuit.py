"""The circuit object model shared by the parser and the engines."""

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
import math
from typing import ClassVar, Self

from ..config.topology import ElementKind
from ..const import GROUND

NodePair = tuple[str, str]


@dataclass(frozen=True)
class Element:
    """An element of a circuit, identified by its unique name."""

    kind: ClassVar[ElementKind]
    name: str

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        raise NotImplementedError

    def values(self) -> dict[str, float]:
        """Return the numeric parameters keyed by field name."""
        return {}


@dataclass(frozen=True)
class Resistor(Element):
    """A linear resistor between two nodes."""

    kind: ClassVar[ElementKind] = ElementKind.RESISTOR
    n1: str
    n2: str
    ohms: float

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.n1, self.n2)

    def values(self) -> dict[str, float]:
        """Return the numeric parameters keyed by field name."""
        return {"ohms": self.ohms}


@dataclass(frozen=True)
class VSource(Element):
    """An independent voltage source, v(plus) - v(minus) = volts."""

    kind: ClassVar[ElementKind] = ElementKind.VSOURCE
    plus: str
    minus: str
    volts: float

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.plus, self.minus)


@dataclass(frozen=True)
class ISource(Element):
    """An independent current source, amps flow from plus through it to minus."""

    kind: ClassVar[ElementKind] = ElementKind.ISOURCE
    plus: str
    minus: str
    amps: float

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.plus, self.minus)


@dataclass(frozen=True)
class Vcvs(Element):
    """Voltage controlled voltage source, v(plus, minus) = gain * v(ctrl)."""

    kind: ClassVar[ElementKind] = ElementKind.VCVS
    plus: str
    minus: str
    ctrl_plus: str
    ctrl_minus: str
    gain: float

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.plus, self.minus, self.ctrl_plus, self.ctrl_minus)

    @property
    def output_terminals(self) -> tuple[str, str]:
        """Return the nodes the source drives."""
        return (self.plus, self.minus)


@dataclass(frozen=True)
class Vccs(Element):
    """Voltage controlled current source, siemens * v(ctrl) flows plus to minus."""

    kind: ClassVar[ElementKind] = ElementKind.VCCS
    plus: str
    minus: str
    ctrl_plus: str
    ctrl_minus: str
    siemens: float

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.plus, self.minus, self.ctrl_plus, self.ctrl_minus)

    @property
    def output_terminals(self) -> tuple[str, str]:
        """Return the nodes the source drives."""
        return (self.plus, self.minus)


@dataclass(frozen=True)
class BjtPi(Element):
    """A bipolar transistor described by its hybrid-pi small-signal model."""

    kind: ClassVar[ElementKind] = ElementKind.BJT_PI
    collector: str
    base: str
    emitter: str
    gm: float
    rpi: float
    ro: float

    @property
    def beta(self) -> float:
        """Return the current gain gm * rpi."""
        return self.gm * self.rpi

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.collector, self.base, self.emitter)

    def values(self) -> dict[str, float]:
        """Return the numeric parameters keyed by field name."""
        return {"gm": self.gm, "rpi": self.rpi, "ro": self.ro}


@dataclass(frozen=True)
class OpAmp(Element):
    """An op-amp macro: gain K on v(plus, minus) behind rout, rin across inputs."""

    kind: ClassVar[ElementKind] = ElementKind.OPAMP
    plus: str
    minus: str
    out: str
    K: float
    rout: float
    rin: float = math.inf

    @property
    def terminals(self) -> tuple[str, ...]:
        """Return the nodes this element connects to."""
        return (self.plus, self.minus, self.out)

    def values(self) -> dict[str, float]:
        """Return the numeric parameters keyed by field name."""
        return {"K": self.K, "rout": self.rout, "rin": self.rin}


PRIMITIVE_KINDS = frozenset(
    {
        ElementKind.RESISTOR,
        ElementKind.VSOURCE,
        ElementKind.ISOURCE,
        ElementKind.VCVS,
        ElementKind.VCCS,
    }
)
SOURCE_KINDS = frozenset({ElementKind.VSOURCE, ElementKind.ISOURCE})


@dataclass(frozen=True)
class PortAnnotations:
    """The declared input and output ports and the feedback network."""

    input_port: NodePair | None = None
    output_port: NodePair | None = None
    feedback_elements: frozenset[str] = frozenset()

    @property
    def nodes(self) -> tuple[str, ...]:
        """Return every node named by a port."""
        found: list[str] = []
        for port in (self.input_port, self.output_port):
            if port is not None:
                found.extend(port)
        return tuple(found)


class _ElementContainer:
    """Lookups shared by the circuit and the linear circuit."""

    elements: tuple[Element, ...]

    def __iter__(self) -> Iterator[Element]:
        """Iterate over the elements in order."""
        return iter(self.elements)

    def __len__(self) -> int:
        """Return the element count."""
        return len(self.elements)

    def __contains__(self, name: object) -> bool:
        """If an element with this name exists."""
        return any(e.name == name for e in self.elements)

    def element(self, name: str) -> Element:
        """Return the element with this name."""
        for elem in self.elements:
            if elem.name == name:
                return elem
        raise KeyError(name)

    def of_kind(self, *kinds: ElementKind) -> list[Element]:
        """Return the elements of the given kinds in order."""
        return [e for e in self.elements if e.kind in kinds]

    @property
    def element_names(self) -> list[str]:
        """Return the element names in order."""
        return [e.name for e in self.elements]


def collect_nodes(elements: Iterable[Element]) -> frozenset[str]:
    """Return every node an element terminal references."""
    return frozenset(node for elem in elements for node in elem.terminals)


@dataclass(frozen=True)
class Circuit(_ElementContainer):
    """A parsed circuit: elements in order plus port annotations."""

    elements: tuple[Element, ...] = ()
    annotations: PortAnnotations = field(default_factory=PortAnnotations)
    title: str = ""

    @property
    def nodes(self) -> frozenset[str]:
        """Return every node of the circuit."""
        return collect_nodes(self.elements)

    @property
    def has_ground(self) -> bool:
        """If the ground node is part of the circuit."""
        return GROUND in self.nodes

    @property
    def feedback_elements(self) -> list[Element]:
        """Return the elements declared as the feedback network."""
        names = self.annotations.feedback_elements
        return [e for e in self.elements if e.name in names]

    @property
    def forward_elements(self) -> list[Element]:
        """Return the elements outside the feedback network."""
        names = self.annotations.feedback_elements
        return [e for e in self.elements if e.name not in names]

    def with_elements(self, elements: Iterable[Element]) -> Self:
        """Return a copy holding other elements."""
        return replace(self, elements=tuple(elements))

    def with_annotations(self, **changes: object) -> Self:
        """Return a copy with changed port annotations."""
        return replace(self, annotations=replace(self.annotations, **changes))


@dataclass(frozen=True)
class LinearCircuit(_ElementContainer):
    """A circuit made only of primitive linear elements."""

    elements: tuple[Element, ...] = ()
    provenance: Mapping[str, str] = field(default_factory=dict)
    annotations: PortAnnotations = field(default_factory=PortAnnotations)
    title: str = ""

    def __post_init__(self) -> None:
        """Only primitive kinds are allowed."""
        for elem in self.elements:
            if elem.kind not in PRIMITIVE_KINDS:
                raise TypeError(f"{elem.name} is a {elem.kind} macro")

    @property
    def nodes(self) -> frozenset[str]:
        """Return every node of the circuit."""
        return collect_nodes(self.elements)

    @property
    def sources(self) -> list[Element]:
        """Return the independent sources."""
        return self.of_kind(*SOURCE_KINDS)

    def origin(self, name: str) -> str:
        """Return the macro a primitive came from, or its own name."""
        return self.provenance.get(name, name)

    def with_elements(self, elements: Iterable[Element]) -> Self:
        """Return a copy holding other elements, provenance kept for survivors."""
        kept = tuple(elements)
        names = {e.name for e in kept}
        provenance = {k: v for k, v in self.provenance.items() if k in names}
        return replace(self, elements=kept, provenance=provenance)

    def adding(self, *elements: Element) -> Self:
        """Return a copy with extra elements appended."""
        return self.with_elements((*self.elements, *elements))

    def unique_name(self, wanted: str) -> str:
        """Return wanted, suffixed until no element has that name."""
        name = wanted
        index = 1
        while name in self:
            name = f"{wanted}_{index}"
            index += 1
        return name
