"""Netlist front end: parse, serialize and validate circuit descriptions.

Grammar, one statement per line:

    * comment                         full line comment
    R<name> n1 n2 value               resistor
    V<name> n+ n- value               voltage source
    I<name> n+ n- value               current source, flows n+ -> source -> n-
    E<name> n+ n- nc+ nc- gain        voltage controlled voltage source
    G<name> n+ n- nc+ nc- gm          voltage controlled current source
    Q<name> c b e gm=.. rpi=.. ro=..  hybrid-pi bipolar transistor
    A<name> plus minus out K=.. rout=.. [rin=..]   op-amp
    .title text
    .input n+ n-
    .output n+ n-
    .feedback e1 e2 ...
    .end

A ``;`` starts a trailing comment. Values take the suffixes p n u m k M G.
"""

from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path

import networkx as nx

from .base.circuit import (
    BjtPi,
    Circuit,
    Element,
    ISource,
    OpAmp,
    PortAnnotations,
    Resistor,
    Vccs,
    Vcvs,
    VSource,
)
from .base.errors import (
    DuplicateName,
    NetlistError,
    NetlistSyntaxError,
    UnknownElementKind,
)
from .config.topology import ElementKind, FindingCode
from .const import GROUND
from .util import parse_quantity

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Token:
    """A word of a statement with its 1-based column."""

    text: str
    column: int


def _tokenize(line: str) -> list[_Token]:
    """Split a line into tokens, dropping any trailing comment."""
    body = line.split(";", 1)[0]
    tokens: list[_Token] = []
    column = 0
    for word in body.split():
        column = body.index(word, column)
        tokens.append(_Token(word, column + 1))
        column += len(word)
    return tokens


class _Statement:
    """The tokens of one statement and helpers to read them."""

    def __init__(self, tokens: list[_Token], line: int) -> None:
        """Set up the statement."""
        self.tokens = tokens
        self.line = line

    @property
    def name(self) -> str:
        """Return the element name."""
        return self.tokens[0].text

    def error(self, reason: str, token: _Token | None = None) -> NetlistSyntaxError:
        """Return a syntax error pointing at a token."""
        column = token.column if token is not None else self.tokens[0].column
        return NetlistSyntaxError(reason, self.line, column)

    def positional(self, count: int, what: str) -> list[_Token]:
        """Return the positional tokens after the name, exactly count of them."""
        found = [t for t in self.tokens[1:] if "=" not in t.text]
        keywords = [t for t in self.tokens[1:] if "=" in t.text]
        if len(found) != count:
            raise self.error(
                f"{self.name}: expected {count} fields ({what}), got {len(found)}"
            )
        if keywords and self.tokens.index(keywords[0]) <= count:
            raise self.error(f"{self.name}: keyword before nodes", keywords[0])
        return found

    def value(self, token: _Token) -> float:
        """Read a numeric token."""
        try:
            return parse_quantity(token.text)
        except ValueError as err:
            raise self.error(f"{self.name}: {err}", token) from err

    def keywords(
        self, required: tuple[str, ...], optional: tuple[str, ...] = ()
    ) -> dict[str, float]:
        """Read key=value tokens, keys are case-insensitive."""
        allowed = {k.lower(): k for k in (*required, *optional)}
        found: dict[str, float] = {}
        for token in self.tokens[1:]:
            if "=" not in token.text:
                continue
            key, _, raw = token.text.partition("=")
            canonical = allowed.get(key.lower())
            if canonical is None:
                raise self.error(f"{self.name}: unknown parameter {key!r}", token)
            if canonical in found:
                raise self.error(f"{self.name}: repeated parameter {key!r}", token)
            if not raw:
                raise self.error(f"{self.name}: missing value for {key!r}", token)
            found[canonical] = self.value(_Token(raw, token.column + len(key) + 1))
        missing = [k for k in required if k not in found]
        if missing:
            raise self.error(f"{self.name}: missing {', '.join(missing)}")
        return found


def _no_keywords(stmt: _Statement) -> None:
    """Reject key=value tokens on primitive statements."""
    for token in stmt.tokens[1:]:
        if "=" in token.text:
            raise stmt.error(f"{stmt.name}: unexpected {token.text!r}", token)


def _parse_resistor(stmt: _Statement) -> Element:
    _no_keywords(stmt)
    n1, n2, value = stmt.positional(3, "n1 n2 value")
    return Resistor(stmt.name, n1.text, n2.text, stmt.value(value))


def _parse_vsource(stmt: _Statement) -> Element:
    _no_keywords(stmt)
    plus, minus, value = stmt.positional(3, "n+ n- value")
    return VSource(stmt.name, plus.text, minus.text, stmt.value(value))


def _parse_isource(stmt: _Statement) -> Element:
    _no_keywords(stmt)
    plus, minus, value = stmt.positional(3, "n+ n- value")
    return ISource(stmt.name, plus.text, minus.text, stmt.value(value))


def _parse_vcvs(stmt: _Statement) -> Element:
    _no_keywords(stmt)
    plus, minus, cp, cm, gain = stmt.positional(5, "n+ n- nc+ nc- gain")
    return Vcvs(
        stmt.name, plus.text, minus.text, cp.text, cm.text, stmt.value(gain)
    )


def _parse_vccs(stmt: _Statement) -> Element:
    _no_keywords(stmt)
    plus, minus, cp, cm, gm = stmt.positional(5, "n+ n- nc+ nc- gm")
    return Vccs(stmt.name, plus.text, minus.text, cp.text, cm.text, stmt.value(gm))


def _parse_bjt(stmt: _Statement) -> Element:
    collector, base, emitter = stmt.positional(3, "collector base emitter")
    values = stmt.keywords(("gm", "rpi", "ro"))
    return BjtPi(
        stmt.name,
        collector.text,
        base.text,
        emitter.text,
        values["gm"],
        values["rpi"],
        values["ro"],
    )


def _parse_opamp(stmt: _Statement) -> Element:
    plus, minus, out = stmt.positional(3, "plus minus out")
    values = stmt.keywords(("K", "rout"), ("rin",))
    return OpAmp(
        stmt.name,
        plus.text,
        minus.text,
        out.text,
        values["K"],
        values["rout"],
        values.get("rin", math.inf),
    )


_ELEMENT_PARSERS: dict[str, Callable[[_Statement], Element]] = {
    "R": _parse_resistor,
    "V": _parse_vsource,
    "I": _parse_isource,
    "E": _parse_vcvs,
    "G": _parse_vccs,
    "Q": _parse_bjt,
    "A": _parse_opamp,
}


class _NetlistReader:
    """Accumulates the statements of one netlist."""

    def __init__(self) -> None:
        """Start with an empty circuit."""
        self.title = ""
        self.elements: list[Element] = []
        self.seen: dict[str, int] = {}
        self.input_port: tuple[str, str] | None = None
        self.output_port: tuple[str, str] | None = None
        self.feedback: list[str] = []
        self.ended = False

    def read(self, text: str) -> Circuit:
        """Read every line of the text."""
        for number, raw in enumerate(text.splitlines(), start=1):
            if self.ended:
                break
            stripped = raw.strip()
            if not stripped or stripped.startswith("*"):
                continue
            if stripped.startswith("."):
                self._directive(raw, number)
            else:
                self._element(raw, number)
        return Circuit(
            elements=tuple(self.elements),
            annotations=PortAnnotations(
                input_port=self.input_port,
                output_port=self.output_port,
                feedback_elements=frozenset(self.feedback),
            ),
            title=self.title,
        )

    def _element(self, raw: str, number: int) -> None:
        tokens = _tokenize(raw)
        if not tokens:
            return
        head = tokens[0]
        parser = _ELEMENT_PARSERS.get(head.text[0].upper())
        if parser is None:
            raise UnknownElementKind(head.text, number, head.column)
        if len(head.text) < 2:
            raise NetlistSyntaxError(
                f"element {head.text!r} needs a name after its letter",
                number,
                head.column,
            )
        key = head.text.casefold()
        if key in self.seen:
            raise DuplicateName(head.text, number, head.column)
        self.seen[key] = number
        self.elements.append(parser(_Statement(tokens, number)))

    def _directive(self, raw: str, number: int) -> None:
        tokens = _tokenize(raw)
        if not tokens:
            return
        head = tokens[0]
        word = head.text.lower()
        if word == ".title":
            body = raw.split(";", 1)[0].strip()
            self.title = body[len(head.text) :].strip()
        elif word in (".input", ".output"):
            if len(tokens) != 3:
                raise NetlistSyntaxError(
                    f"{word} takes two nodes", number, head.column
                )
            pair = (tokens[1].text, tokens[2].text)
            if word == ".input":
                self.input_port = pair
            else:
                self.output_port = pair
        elif word == ".feedback":
            if len(tokens) < 2:
                raise NetlistSyntaxError(
                    ".feedback needs at least one element", number, head.column
                )
            self.feedback.extend(t.text for t in tokens[1:])
        elif word == ".end":
            self.ended = True
        else:
            raise NetlistSyntaxError(
                f"unknown directive {head.text!r}", number, head.column
            )


def parse_netlist(text: str) -> Circuit:
    """Parse netlist text into a circuit."""
    circuit = _NetlistReader().read(text)
    _LOGGER.debug(
        "%s: Parsed %d elements", circuit.title or "<netlist>", len(circuit.elements)
    )
    return circuit


def load_netlist(path: str | Path) -> Circuit:
    """Read and parse a netlist file, errors carry the file name."""
    path = Path(path)
    try:
        return parse_netlist(path.read_text(encoding="utf-8"))
    except NetlistError as err:
        err.filename = str(path)
        raise


def _fmt(value: float) -> str:
    return repr(float(value))


def _serialize_element(elem: Element) -> str:
    match elem:
        case Resistor():
            return f"{elem.name} {elem.n1} {elem.n2} {_fmt(elem.ohms)}"
        case VSource():
            return f"{elem.name} {elem.plus} {elem.minus} {_fmt(elem.volts)}"
        case ISource():
            return f"{elem.name} {elem.plus} {elem.minus} {_fmt(elem.amps)}"
        case Vcvs():
            return (
                f"{elem.name} {elem.plus} {elem.minus} "
                f"{elem.ctrl_plus} {elem.ctrl_minus} {_fmt(elem.gain)}"
            )
        case Vccs():
            return (
                f"{elem.name} {elem.plus} {elem.minus} "
                f"{elem.ctrl_plus} {elem.ctrl_minus} {_fmt(elem.siemens)}"
            )
        case BjtPi():
            return (
                f"{elem.name} {elem.collector} {elem.base} {elem.emitter} "
                f"gm={_fmt(elem.gm)} rpi={_fmt(elem.rpi)} ro={_fmt(elem.ro)}"
            )
        case OpAmp():
            text = (
                f"{elem.name} {elem.plus} {elem.minus} {elem.out} "
                f"K={_fmt(elem.K)} rout={_fmt(elem.rout)}"
            )
            if not math.isinf(elem.rin):
                text += f" rin={_fmt(elem.rin)}"
            return text
    raise TypeError(f"can not serialize {elem!r}")


def serialize(circuit: Circuit) -> str:
    """Return the canonical netlist text of a circuit."""
    lines: list[str] = []
    if circuit.title:
        lines.append(f".title {circuit.title}")
    lines.extend(_serialize_element(elem) for elem in circuit.elements)
    notes = circuit.annotations
    if notes.input_port is not None:
        lines.append(f".input {notes.input_port[0]} {notes.input_port[1]}")
    if notes.output_port is not None:
        lines.append(f".output {notes.output_port[0]} {notes.output_port[1]}")
    if notes.feedback_elements:
        lines.append(".feedback " + " ".join(sorted(notes.feedback_elements)))
    lines.append(".end")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Finding:
    """One problem found in a circuit."""

    code: FindingCode
    subject: str = ""

    def __str__(self) -> str:
        """Render the finding for a report."""
        if self.subject:
            return f"{self.code}: {self.subject}"
        return str(self.code)


@dataclass
class ValidationReport:
    """The problems found in a circuit, empty when the circuit is valid."""

    findings: list[Finding] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        """If no problem was found."""
        return not self.findings

    def __iter__(self) -> Iterator[Finding]:
        """Iterate over the findings."""
        return iter(self.findings)

    def __len__(self) -> int:
        """Return the number of findings."""
        return len(self.findings)

    def __contains__(self, item: object) -> bool:
        """If the finding is in the report."""
        return item in self.findings

    def add(self, code: FindingCode, subject: str = "") -> None:
        """Add a finding once."""
        finding = Finding(code, subject)
        if finding not in self.findings:
            self.findings.append(finding)


def connectivity_graph(elements: list[Element] | tuple[Element, ...]) -> nx.Graph:
    """Return the graph joining all terminals of each element."""
    graph = nx.Graph()
    for elem in elements:
        terminals = list(dict.fromkeys(elem.terminals))
        graph.add_nodes_from(terminals)
        for index, node in enumerate(terminals):
            for other in terminals[index + 1 :]:
                graph.add_edge(node, other)
    return graph


def _check_values(elem: Element, report: ValidationReport) -> None:
    if elem.kind in (ElementKind.VCVS, ElementKind.VCCS):
        gain = elem.gain if isinstance(elem, Vcvs) else elem.siemens
        if not math.isfinite(gain):
            report.add(FindingCode.NON_FINITE_VALUE, elem.name)
        return
    if elem.kind in (ElementKind.VSOURCE, ElementKind.ISOURCE):
        value = elem.volts if isinstance(elem, VSource) else elem.amps
        if not math.isfinite(value):
            report.add(FindingCode.NON_FINITE_VALUE, elem.name)
        return
    for key, value in elem.values().items():
        if math.isnan(value) or value <= 0:
            report.add(FindingCode.NON_POSITIVE_VALUE, f"{elem.name}.{key}")
        elif math.isinf(value) and key != "rin":
            report.add(FindingCode.NON_FINITE_VALUE, f"{elem.name}.{key}")


def validate(circuit: Circuit) -> ValidationReport:
    """Check the circuit invariants, problems are returned as data."""
    report = ValidationReport()
    nodes = circuit.nodes

    if GROUND not in nodes:
        report.add(FindingCode.NO_GROUND)

    seen: set[str] = set()
    for elem in circuit.elements:
        key = elem.name.casefold()
        if key in seen:
            report.add(FindingCode.DUPLICATE_NAME, elem.name)
        seen.add(key)
        _check_values(elem, report)

    graph = connectivity_graph(circuit.elements)
    if GROUND in graph:
        reachable = nx.node_connected_component(graph, GROUND)
        for node in sorted(nodes - reachable):
            report.add(FindingCode.FLOATING_NODE, node)

    notes = circuit.annotations
    for node in notes.nodes:
        if node not in nodes:
            report.add(FindingCode.UNKNOWN_NODE, node)
    names = set(circuit.element_names)
    for name in sorted(notes.feedback_elements):
        if name not in names:
            report.add(FindingCode.UNKNOWN_FEEDBACK_ELEMENT, name)
    if (
        notes.input_port is not None
        and notes.output_port is not None
        and set(notes.input_port) == set(notes.output_port)
    ):
        report.add(FindingCode.SAME_PORTS, " ".join(notes.input_port))

    for finding in report:
        _LOGGER.debug("%s: %s", circuit.title or "<netlist>", finding)
    return report
