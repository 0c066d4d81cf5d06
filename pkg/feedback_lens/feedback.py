"""Feedback topology classification, loading and output impedance closed forms."""

from dataclasses import dataclass, field
import logging
import math

import networkx as nx

from .base.circuit import (
    BjtPi,
    Circuit,
    Element,
    ISource,
    LinearCircuit,
    NodePair,
    OpAmp,
    Resistor,
    Vccs,
    VSource,
)
from .base.errors import NonPassiveFeedback, UnclassifiableTopology
from .base.reference_circuits import reference_circuit
from .config.amplifier_params import AmplifierParams
from .config.engine_names import FeedbackCase
from .config.topology import Connection, ElementKind, Validity
from .const import (
    DEFAULT_DOMINANCE_RATIO,
    DEFAULT_R2,
    GROUND,
    INPUT_SHORT_SOURCE,
    OUTPUT_SHORT_SOURCE,
    SENSE_SOURCE,
)
from .mna import assemble, driving_point_impedance, solve
from .netlist import connectivity_graph
from .smallsignal import feedback_network, linearize, non_passive
from .util import parallel

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeedbackTopology:
    """How the feedback network mixes at the input and senses at the output."""

    input_mix: Connection
    output_sense: Connection
    validity: Validity
    # Ports of the feedback network itself, used to measure its loading.
    input_pair: NodePair = field(default=("", GROUND), compare=False)
    output_pair: NodePair = field(default=("", GROUND), compare=False)

    @property
    def label(self) -> str:
        """Return input-output, e.g. series-shunt."""
        return f"{self.input_mix}-{self.output_sense}"

    def __str__(self) -> str:
        """Render as "series-series (valid)"."""
        return f"{self.label} ({self.validity})"


@dataclass(frozen=True)
class LoadingModel:
    """The loading of the feedback network on the forward amplifier."""

    R_if: float
    R_of: float
    f: float


@dataclass(frozen=True)
class FeedbackAnalysis:
    """Topology, loading and closed form impedances of one stage."""

    case: FeedbackCase
    topology: FeedbackTopology
    loading: LoadingModel
    one_plus_af: float
    R_bf: float
    R_X: float
    R_out: float
    params: AmplifierParams
    # Collector output only: intermediate and simplified closed forms.
    R_X_substituted: float | None = None
    R_X_simplified: float | None = None
    simplified_valid: bool | None = None


def _without_ground(graph: nx.Graph) -> nx.Graph:
    graph = graph.copy()
    if GROUND in graph:
        graph.remove_node(GROUND)
    return graph


def _connected(graph: nx.Graph, a: str, b: str) -> bool:
    return a in graph and b in graph and nx.has_path(graph, a, b)


class _TopologyRules:
    """The port relation rules evaluated on one annotated circuit."""

    def __init__(self, circuit: Circuit) -> None:
        """Work out the boundary nodes and the two connectivity graphs."""
        notes = circuit.annotations
        if notes.input_port is None or notes.output_port is None:
            raise UnclassifiableTopology("input and output ports must be declared")
        if not notes.feedback_elements:
            raise UnclassifiableTopology("no feedback elements declared")
        unknown = sorted(set(notes.feedback_elements) - set(circuit.element_names))
        if unknown:
            raise UnclassifiableTopology(
                f"unknown feedback elements: {', '.join(unknown)}"
            )
        self.circuit = circuit
        self.input_port = notes.input_port
        self.output_port = notes.output_port

        feedback = circuit.feedback_elements
        forward = circuit.forward_elements
        feedback_nodes = {n for e in feedback for n in e.terminals}
        forward_nodes = {n for e in forward for n in e.terminals}
        port_nodes = set(notes.nodes)
        self.boundary = {
            n
            for n in feedback_nodes
            if n != GROUND and (n in forward_nodes or n in port_nodes)
        }
        self.forward_graph = _without_ground(connectivity_graph(forward))
        self.feedback_graph = connectivity_graph(feedback)

    def nearest_boundary(self, start: str, exclude: str | None = None) -> str:
        """Return the boundary node closest to start through forward elements."""
        if start not in self.forward_graph:
            raise UnclassifiableTopology(f"port node {start} has no forward path")
        distances = nx.single_source_shortest_path_length(self.forward_graph, start)
        found = [(d, n) for n, d in distances.items() if n in self.boundary]
        if not found:
            raise UnclassifiableTopology(f"feedback network not reachable from {start}")
        closest = min(d for d, _ in found)
        candidates = sorted(n for d, n in found if d == closest)
        if len(candidates) > 1 and exclude is not None:
            candidates = [n for n in candidates if n != exclude]
        if len(candidates) != 1:
            raise UnclassifiableTopology(
                f"ambiguous feedback port near {start}: {', '.join(candidates)}"
            )
        return candidates[0]

    def output_side(self) -> tuple[Connection, str]:
        """Return the output sensing and the node it happens at."""
        plus, reference = self.output_port
        if plus in self.boundary:
            return Connection.SHUNT, plus
        node = self.nearest_boundary(plus)
        if _connected(self.feedback_graph, node, reference):
            return Connection.SERIES, node
        raise UnclassifiableTopology(
            f"feedback at {node} is neither across nor in series with the output"
        )

    def is_collector_return(self, node: str) -> bool:
        """If the mixing node is an output collector and no amplifier input."""
        if node in self.input_port:
            return False
        for elem in self.circuit.elements:
            if isinstance(elem, OpAmp) and node in (elem.plus, elem.minus):
                return False
        return any(
            isinstance(e, BjtPi) and e.collector == node for e in self.circuit.elements
        )

    def input_side(self, sense_node: str) -> tuple[Connection, str, Validity]:
        """Return the input mixing, the node it happens at and the validity."""
        plus, reference = self.input_port
        if plus in self.boundary:
            return Connection.SHUNT, plus, Validity.VALID
        node = self.nearest_boundary(plus, exclude=sense_node)
        series = _connected(self.feedback_graph, node, reference)
        if self.is_collector_return(node):
            mix = Connection.SERIES if series else Connection.SHUNT
            return mix, node, Validity.IRRELEVANT
        if series:
            return Connection.SERIES, node, Validity.VALID
        raise UnclassifiableTopology(
            f"feedback at {node} is neither across nor in series with the input"
        )


def classify_topology(circuit: Circuit) -> FeedbackTopology:
    """Classify the feedback by how its network meets the declared ports."""
    rules = _TopologyRules(circuit)
    output_sense, sense_node = rules.output_side()
    input_mix, mix_node, validity = rules.input_side(sense_node)
    topology = FeedbackTopology(
        input_mix=input_mix,
        output_sense=output_sense,
        validity=validity,
        input_pair=(mix_node, rules.input_port[1]),
        output_pair=(sense_node, rules.output_port[1]),
    )
    _LOGGER.debug(
        "%s: Classified %s, mixing at %s, sensing at %s",
        circuit.title or "<circuit>",
        topology,
        mix_node,
        sense_node,
    )
    return topology


def _shorted(lc: LinearCircuit, pair: NodePair, name: str) -> LinearCircuit:
    return lc.adding(VSource(lc.unique_name(name), pair[0], pair[1], 0.0))


def loading_effect(fb: LinearCircuit, topology: FeedbackTopology) -> LoadingModel:
    """Measure the loading and the feedback factor of a resistive network."""
    active = non_passive(fb)
    if active:
        raise NonPassiveFeedback(active)
    in_pair, out_pair = topology.input_pair, topology.output_pair
    input_shunt = topology.input_mix == Connection.SHUNT
    output_shunt = topology.output_sense == Connection.SHUNT

    # A shunt port is shorted while the other side is measured, a series one open.
    r_of = driving_point_impedance(
        _shorted(fb, in_pair, INPUT_SHORT_SOURCE) if input_shunt else fb, out_pair
    )
    r_if = driving_point_impedance(
        _shorted(fb, out_pair, OUTPUT_SHORT_SOURCE) if output_shunt else fb, in_pair
    )

    sense_name = fb.unique_name(SENSE_SOURCE)
    excite: Element
    if output_shunt:
        excite = VSource(sense_name, out_pair[0], out_pair[1], 1.0)
    else:
        excite = ISource(sense_name, out_pair[1], out_pair[0], 1.0)
    excited = fb.adding(excite)
    if input_shunt:
        short_name = excited.unique_name(INPUT_SHORT_SOURCE)
        excited = _shorted(excited, in_pair, short_name)
        solution = solve(assemble(excited))
        # Current entering the network at the plus node of the input side.
        factor = -solution.current(short_name)
    else:
        factor = solve(assemble(excited)).voltage_between(in_pair)

    loading = LoadingModel(R_if=r_if, R_of=r_of, f=factor)
    _LOGGER.debug("%s: Loading %s", fb.title or "<feedback>", loading)
    return loading


def _s(p: AmplifierParams) -> float:
    return p.r_out + p.r_pi


def one_plus_af_case1(p: AmplifierParams) -> float:
    """Return 1+af of the collector output stage, as printed."""
    reflected = _s(p) / (p.beta + 1)
    return (p.R1 * (p.K + 1) + reflected) / (p.R1 + reflected)


def one_plus_af_case2(p: AmplifierParams) -> float:
    """Return 1+af of the emitter output stage, 1 + K R1/(R2 + S/beta)."""
    return 1 + p.K * p.R1 / (p.R2 + _s(p) / p.beta)


def branch_current_openloop(p: AmplifierParams) -> float:
    """Return i_o/v_in = K/(R1 + (r_out + r_pi)/(beta + 1))."""
    return p.K / (p.R1 + _s(p) / (p.beta + 1))


def branch_resistance_feedback(p: AmplifierParams, case: FeedbackCase) -> float:
    """Return the output branch resistance with feedback, R_bf."""
    if FeedbackCase(case) == FeedbackCase.COLLECTOR_OUTPUT:
        return (p.R1 + _s(p) / (p.beta + 1)) * one_plus_af_case1(p)
    return (p.R2 + _s(p) / p.beta) * one_plus_af_case2(p)


def rx_from_branch_resistance(p: AmplifierParams) -> float:
    """Return R_X = R_bf - R2 of the emitter output stage."""
    return branch_resistance_feedback(p, FeedbackCase.EMITTER_OUTPUT) - p.R2


def degeneration_rx(
    r_o: float, g_m: float, beta: float, R_E: float, R_S: float
) -> float:
    """Return r_o (1 + gm R_E + gm R_S/beta) / (1 + gm R_E/beta + gm R_S/beta)."""
    if math.isinf(R_E):
        return r_o * beta
    return (
        r_o
        * (1 + g_m * R_E + g_m * R_S / beta)
        / (1 + g_m * R_E / beta + g_m * R_S / beta)
    )


def closed_form_rx_case1(p: AmplifierParams) -> float:
    """Return the collector output stage closed form for R_X."""
    b = p.beta
    loop = p.R1 * (p.K + 1) * (b + 1)
    numerator = p.r_o * (loop + 2 * p.r_out + 2 * p.r_pi)
    denominator = (loop + p.r_out * (b + 1) + p.r_pi * (b + 1)) / b
    return numerator / denominator


def substituted_rx_case1(p: AmplifierParams) -> float:
    """Return degeneration_rx with R_E -> R_bf and R_S -> r_out."""
    return degeneration_rx(
        p.r_o,
        p.g_m,
        p.beta,
        branch_resistance_feedback(p, FeedbackCase.COLLECTOR_OUTPUT),
        p.r_out,
    )


def simplified_rx_case1(p: AmplifierParams) -> float:
    """Return r_o (1 + R1 gm (K+1)) / (1 + R1 gm (K+1)/beta)."""
    boost = p.R1 * p.g_m * (p.K + 1)
    return p.r_o * (1 + boost) / (1 + boost / p.beta)


def simplified_rx_case1_valid(
    p: AmplifierParams, ratio: float = DEFAULT_DOMINANCE_RATIO
) -> bool:
    """If R1 (beta+1)(K+1) dominates r_out (beta+1) + r_pi by ratio."""
    b = p.beta
    return p.R1 * (b + 1) * (p.K + 1) >= ratio * (p.r_out * (b + 1) + p.r_pi)


def exact_rx_case1(p: AmplifierParams) -> float:
    """Return the exact R_X of the collector output stage."""
    s = _s(p)
    return (p.r_o * (1 + p.R1 * (p.beta + 1) * (p.K + 1) / s) + p.R1) / (
        1 + p.R1 * (p.K + 1) / s
    )


def closed_form_rx_case2(p: AmplifierParams) -> float:
    """Return (R1 K beta + r_out + r_pi) / beta."""
    return (p.R1 * p.K * p.beta + _s(p)) / p.beta


def exact_rx_case2(p: AmplifierParams) -> float:
    """Return the exact R_X of the emitter output stage."""
    s = _s(p)
    return (p.r_o * p.R1 * p.K * p.beta + p.r_o * s + p.R1 * s) / (p.r_o * p.beta + s)


def closed_form_rx(case: FeedbackCase, p: AmplifierParams) -> float:
    """Return the closed form R_X of a case."""
    if FeedbackCase(case) == FeedbackCase.COLLECTOR_OUTPUT:
        return closed_form_rx_case1(p)
    return closed_form_rx_case2(p)


def exact_rx(case: FeedbackCase, p: AmplifierParams) -> float:
    """Return the exact formula R_X of a case."""
    if FeedbackCase(case) == FeedbackCase.COLLECTOR_OUTPUT:
        return exact_rx_case1(p)
    return exact_rx_case2(p)


def output_resistance(R_X: float, R2: float) -> float:
    """Return R_X in parallel with R2, an infinite side is open."""
    return parallel(R_X, R2)


def analyze(
    case: FeedbackCase,
    p: AmplifierParams,
    ratio: float = DEFAULT_DOMINANCE_RATIO,
) -> FeedbackAnalysis:
    """Classify, load and evaluate the closed forms of a verification stage."""
    case = FeedbackCase(case)
    circuit = reference_circuit(case, p, with_load=True)
    topology = classify_topology(circuit)
    loading = loading_effect(feedback_network(linearize(circuit)), topology)
    r_x = closed_form_rx(case, p)
    extras: dict[str, float | bool] = {}
    if case == FeedbackCase.COLLECTOR_OUTPUT:
        one_plus_af = one_plus_af_case1(p)
        valid = simplified_rx_case1_valid(p, ratio)
        if not valid:
            _LOGGER.warning(
                "%s: Simplified closed form outside its validity range (ratio %g)",
                circuit.title,
                ratio,
            )
        extras = {
            "R_X_substituted": substituted_rx_case1(p),
            "R_X_simplified": simplified_rx_case1(p),
            "simplified_valid": valid,
        }
    else:
        one_plus_af = one_plus_af_case2(p)
    analysis = FeedbackAnalysis(
        case=case,
        topology=topology,
        loading=loading,
        one_plus_af=one_plus_af,
        R_bf=branch_resistance_feedback(p, case),
        R_X=r_x,
        R_out=output_resistance(r_x, p.R2),
        params=p,
        **extras,  # type: ignore[arg-type]
    )
    _LOGGER.info(
        "%s: %s, 1+af %.4g, R_X %.4g", circuit.title, topology, one_plus_af, r_x
    )
    return analysis


def _is_base_return(elem: Element, q: BjtPi) -> bool:
    return (
        isinstance(elem, Vccs)
        and elem.plus == q.emitter
        and elem.minus == GROUND
        and elem.ctrl_plus == q.base
        and elem.ctrl_minus == q.emitter
        and math.isclose(elem.siemens, 1 / q.rpi, rel_tol=1e-9)
    )


def match_case(circuit: Circuit) -> tuple[FeedbackCase, AmplifierParams] | None:
    """Recognise a collector or emitter output stage and read its parameters."""
    opamps = circuit.of_kind(ElementKind.OPAMP)
    bjts = circuit.of_kind(ElementKind.BJT_PI)
    feedback = circuit.feedback_elements
    port = circuit.annotations.output_port
    if len(opamps) != 1 or len(bjts) != 1 or len(feedback) != 1 or port is None:
        return None
    a, q, r1 = opamps[0], bjts[0], feedback[0]
    if not isinstance(a, OpAmp) or not isinstance(q, BjtPi):
        return None
    if not isinstance(r1, Resistor) or a.out != q.base or port[1] != GROUND:
        return None

    r1_nodes = set(r1.terminals)
    if r1_nodes == {q.emitter, GROUND} and a.minus == q.emitter:
        case, output, other_input = FeedbackCase.COLLECTOR_OUTPUT, q.collector, a.plus
    elif r1_nodes == {q.collector, GROUND} and a.plus == q.collector:
        case, output, other_input = FeedbackCase.EMITTER_OUTPUT, q.emitter, a.minus
    else:
        return None
    if port[0] != output:
        return None

    load = DEFAULT_R2
    for elem in circuit.elements:
        if elem in (a, q, r1):
            continue
        if isinstance(elem, VSource) and set(elem.terminals) == {other_input, GROUND}:
            continue
        if isinstance(elem, Resistor) and set(elem.terminals) == {output, GROUND}:
            load = elem.ohms
            continue
        if case == FeedbackCase.EMITTER_OUTPUT and _is_base_return(elem, q):
            continue
        return None

    params = AmplifierParams(
        K=a.K,
        r_out=a.rout,
        R1=r1.ohms,
        R2=load,
        g_m=q.gm,
        r_pi=q.rpi,
        r_o=q.ro,
        R_in=a.rin,
    )
    return case, params


def has_load(circuit: Circuit) -> bool:
    """If a matched stage carries a load resistor across its output port."""
    port = circuit.annotations.output_port
    if port is None:
        return False
    return any(
        isinstance(e, Resistor)
        and set(e.terminals) == {port[0], GROUND}
        and e.name not in circuit.annotations.feedback_elements
        for e in circuit.elements
    )


def port_value(r_x: float, circuit: Circuit, R2: float) -> float:
    """Return what the output port measures: R_X, or R_X parallel the load."""
    if has_load(circuit):
        return output_resistance(r_x, R2)
    return r_x

