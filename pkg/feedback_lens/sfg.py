"""Signal flow graphs and Mason's gain formula."""

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import pairwise
import logging
import math

import networkx as nx

from .base.errors import (
    LimitExceeded,
    MultipleDefinitions,
    NonFiniteGain,
    ZeroDeterminant,
)
from .const import DEFAULT_ENUMERATION_CAP

_LOGGER = logging.getLogger(__name__)


class FlowGraph:
    """A directed graph of signal variables with real edge gains.

    Gains are floats or exact Fractions. Mason's formula stays exact over a
    graph whose gains are all Fractions.
    """

    def __init__(self, description: str = "") -> None:
        """Start with an empty graph."""
        self.description = description
        self.graph = nx.DiGraph()

    def __contains__(self, node: object) -> bool:
        """If the variable is a node of the graph."""
        return node in self.graph

    @property
    def nodes(self) -> list[str]:
        """Return the nodes in insertion order."""
        return list(self.graph.nodes)

    def add_node(self, node: str) -> None:
        """Add a variable without edges."""
        self.graph.add_node(node)

    def add_edge(self, src: str, dst: str, gain: float | Fraction) -> None:
        """Add an edge, summing into any existing src->dst edge."""
        if not isinstance(gain, Fraction):
            gain = float(gain)
            if not math.isfinite(gain):
                raise NonFiniteGain(f"{src} -> {dst}: gain {gain} is not finite")
        self.graph.add_node(src)
        self.graph.add_node(dst)
        if self.graph.has_edge(src, dst):
            gain += self.graph.edges[src, dst]["gain"]
            if gain == 0:
                self.graph.remove_edge(src, dst)
                return
        if gain != 0:
            self.graph.add_edge(src, dst, gain=gain)

    def gain(self, src: str, dst: str) -> float | Fraction:
        """Return the gain of an edge, 0 when absent."""
        if self.graph.has_edge(src, dst):
            return self.graph.edges[src, dst]["gain"]
        return 0.0

    def edges(self) -> list[tuple[str, str, float | Fraction]]:
        """Return (from, to, gain) for every edge."""
        return [(u, v, data["gain"]) for u, v, data in self.graph.edges(data=True)]

    def __repr__(self) -> str:
        """Show the size of the graph."""
        return (
            f"FlowGraph({self.description!r}, nodes={self.graph.number_of_nodes()}, "
            f"edges={self.graph.number_of_edges()})"
        )


@dataclass(frozen=True)
class Loop:
    """A simple cycle, nodes rotated to start at the smallest node."""

    nodes: tuple[str, ...]
    gain: float | Fraction

    def touches(self, nodes: Iterable[str]) -> bool:
        """If the loop shares a node with the given nodes."""
        return not set(self.nodes).isdisjoint(nodes)


@dataclass(frozen=True)
class Path:
    """A simple forward path from source to sink."""

    nodes: tuple[str, ...]
    gain: float | Fraction


@dataclass(frozen=True)
class MasonTerms:
    """Every term of Mason's formula for one source and sink."""

    forward_paths: list[Path]
    loops: list[Loop]
    determinant: float | Fraction
    cofactors: list[float | Fraction]

    @property
    def gain(self) -> float:
        """Return sum(P_k Delta_k) / Delta."""
        if self.determinant == 0:
            raise ZeroDeterminant("graph determinant is zero")
        numerator = _sum(
            p.gain * c for p, c in zip(self.forward_paths, self.cofactors, strict=True)
        )
        return float(numerator / self.determinant)


def from_linear_system(
    equations: Iterable[tuple[str, Mapping[str, float | Fraction]]],
    description: str = "",
) -> FlowGraph:
    """Build a graph with an edge x -> y of gain c for each term c*x of y."""
    graph = FlowGraph(description)
    defined: set[str] = set()
    for lhs, terms in equations:
        if lhs in defined:
            raise MultipleDefinitions(lhs)
        defined.add(lhs)
        graph.add_node(lhs)
        for variable, coefficient in terms.items():
            graph.add_node(variable)
            if coefficient != 0:
                graph.add_edge(variable, lhs, coefficient)
    return graph


def _sum(terms: Iterable[float | Fraction]) -> float | Fraction:
    """Sum exactly, as a Fraction when any term is one."""
    values = list(terms)
    if any(isinstance(t, Fraction) for t in values):
        return sum((Fraction(t) for t in values), Fraction(0))
    return math.fsum(values)


def _product(
    graph: FlowGraph, nodes: Sequence[str], closed: bool
) -> float | Fraction:
    hops = list(pairwise(nodes))
    if closed:
        hops.append((nodes[-1], nodes[0]))
    return math.prod(graph.gain(u, v) for u, v in hops)


def _rotate(cycle: list[str]) -> tuple[str, ...]:
    start = cycle.index(min(cycle))
    return tuple(cycle[start:] + cycle[:start])


def enumerate_loops(
    graph: FlowGraph, limit: int = DEFAULT_ENUMERATION_CAP
) -> list[Loop]:
    """Return every simple cycle once, ordered by its rotated node sequence."""
    found: list[tuple[str, ...]] = []
    for cycle in nx.simple_cycles(graph.graph):
        if len(found) >= limit:
            raise LimitExceeded(limit, "cycles")
        found.append(_rotate(list(cycle)))
    found.sort()
    loops = [Loop(nodes, _product(graph, nodes, closed=True)) for nodes in found]
    _LOGGER.debug("%s: Found %d loops", graph.description or "<graph>", len(loops))
    return loops


def enumerate_forward_paths(
    graph: FlowGraph, src: str, dst: str, limit: int = DEFAULT_ENUMERATION_CAP
) -> list[Path]:
    """Return every simple path src -> dst with its gain, in sorted order."""
    if src == dst:
        raise ValueError("source and sink must differ")
    if src not in graph or dst not in graph:
        return []
    found: list[tuple[str, ...]] = []
    for nodes in nx.all_simple_paths(graph.graph, src, dst):
        if len(found) >= limit:
            raise LimitExceeded(limit, "paths")
        found.append(tuple(nodes))
    found.sort()
    paths = [Path(nodes, _product(graph, nodes, closed=False)) for nodes in found]
    _LOGGER.debug(
        "%s: Found %d paths %s -> %s",
        graph.description or "<graph>",
        len(paths),
        src,
        dst,
    )
    return paths


def _disjoint_sets(
    loops: Sequence[Loop], start: int, used: frozenset[str]
) -> Iterator[tuple[int, ...]]:
    """Yield index sets of loops that are mutually node-disjoint."""
    for index in range(start, len(loops)):
        if loops[index].touches(used):
            continue
        yield (index,)
        for rest in _disjoint_sets(loops, index + 1, used | set(loops[index].nodes)):
            yield (index, *rest)


def non_touching_sets(loops: Sequence[Loop]) -> list[tuple[int, ...]]:
    """Return the index sets of two or more mutually non-touching loops."""
    return [s for s in _disjoint_sets(loops, 0, frozenset()) if len(s) >= 2]


def _determinant(
    loops: Sequence[Loop], excluded: Iterable[str] = ()
) -> float | Fraction:
    """Return 1 - sum L + sum LL - ... over loops not touching excluded."""
    terms: list[float | Fraction] = [1.0]
    for indices in _disjoint_sets(loops, 0, frozenset(excluded)):
        sign = -1 if len(indices) % 2 else 1
        terms.append(sign * math.prod(loops[i].gain for i in indices))
    return _sum(terms)


def graph_determinant(graph: FlowGraph, limit: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Return the graph determinant over all non-touching loop sets."""
    return float(_determinant(enumerate_loops(graph, limit)))


def mason_terms(
    graph: FlowGraph, src: str, dst: str, limit: int = DEFAULT_ENUMERATION_CAP
) -> MasonTerms:
    """Return the paths, loops, determinant and cofactors for src -> dst."""
    loops = enumerate_loops(graph, limit)
    paths = enumerate_forward_paths(graph, src, dst, limit)
    return MasonTerms(
        forward_paths=paths,
        loops=loops,
        determinant=_determinant(loops),
        cofactors=[_determinant(loops, p.nodes) for p in paths],
    )


def mason_gain(
    graph: FlowGraph, src: str, dst: str, limit: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """Return the transmission src -> dst by Mason's gain formula."""
    terms = mason_terms(graph, src, dst, limit)
    if terms.determinant == 0:
        raise ZeroDeterminant(
            f"{graph.description or '<graph>'}: determinant is zero"
        )
    return terms.gain


def load_edge_list(text: str, description: str = "") -> FlowGraph:
    """Read "from to gain" lines, # starts a comment, parallel edges sum."""
    graph = FlowGraph(description)
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {number}: expected 'from to gain', got {raw!r}")
        src, dst, gain = fields
        try:
            graph.add_edge(src, dst, float(gain))
        except ValueError as err:
            raise ValueError(f"line {number}: {err}") from err
    return graph


def dump_edge_list(graph: FlowGraph) -> str:
    """Write the edges as "from to gain" lines."""
    lines = [f"# {graph.description}"] if graph.description else []
    lines.extend(f"{u} {v} {float(gain)!r}" for u, v, gain in graph.edges())
    return "\n".join(lines) + "\n"
