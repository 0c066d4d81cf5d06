"""Builders for the series-at-output verification stages."""

from ..config.amplifier_params import AmplifierParams
from ..config.engine_names import FeedbackCase
from ..const import GROUND
from .circuit import (
    BjtPi,
    Circuit,
    Element,
    NodePair,
    OpAmp,
    PortAnnotations,
    Resistor,
    Vccs,
    Vcvs,
    VSource,
)

INPUT_NODE = "in"
OUTPUT_NODE = "x"
INPUT_PORT: NodePair = (INPUT_NODE, GROUND)
OUTPUT_PORT: NodePair = (OUTPUT_NODE, GROUND)
FEEDBACK_RESISTOR = "R1"
LOAD_RESISTOR = "R2"
BASE_RETURN_SOURCE = "GRET"


def _annotations() -> PortAnnotations:
    return PortAnnotations(
        input_port=INPUT_PORT,
        output_port=OUTPUT_PORT,
        feedback_elements=frozenset({FEEDBACK_RESISTOR}),
    )


def collector_output_stage(p: AmplifierParams, with_load: bool = False) -> Circuit:
    """Output at the collector, R1 from the emitter to ground.

    The op-amp senses the emitter on its inverting input and drives the base.
    """
    elements: list[Element] = [
        VSource("Vin", INPUT_NODE, GROUND, 0.0),
        OpAmp("A1", INPUT_NODE, "e", "b", p.K, p.r_out, p.R_in),
        BjtPi("Q1", OUTPUT_NODE, "b", "e", p.g_m, p.r_pi, p.r_o),
        Resistor(FEEDBACK_RESISTOR, "e", GROUND, p.R1),
    ]
    if with_load:
        elements.append(Resistor(LOAD_RESISTOR, OUTPUT_NODE, GROUND, p.R2))
    return Circuit(
        elements=tuple(elements),
        annotations=_annotations(),
        title="collector output stage",
    )


def emitter_output_stage(
    p: AmplifierParams, with_load: bool = False, base_current_returned: bool = True
) -> Circuit:
    """Output at the emitter, R1 from the collector to ground.

    The op-amp senses the collector on its non-inverting input. With
    base_current_returned the base current reaching the emitter is drained to
    ground, so the emitter carries g_m v_pi instead of (g_m + 1/r_pi) v_pi.
    """
    elements: list[Element] = [
        VSource("Vin", INPUT_NODE, GROUND, 0.0),
        OpAmp("A1", "c", INPUT_NODE, "b", p.K, p.r_out, p.R_in),
        BjtPi("Q1", "c", "b", OUTPUT_NODE, p.g_m, p.r_pi, p.r_o),
        Resistor(FEEDBACK_RESISTOR, "c", GROUND, p.R1),
    ]
    if base_current_returned:
        elements.append(
            Vccs(BASE_RETURN_SOURCE, OUTPUT_NODE, GROUND, "b", OUTPUT_NODE, 1 / p.r_pi)
        )
    if with_load:
        elements.append(Resistor(LOAD_RESISTOR, OUTPUT_NODE, GROUND, p.R2))
    return Circuit(
        elements=tuple(elements),
        annotations=_annotations(),
        title="emitter output stage",
    )


def reference_circuit(
    case: FeedbackCase, p: AmplifierParams, with_load: bool = False
) -> Circuit:
    """Return the verification stage of a case."""
    if FeedbackCase(case) == FeedbackCase.COLLECTOR_OUTPUT:
        return collector_output_stage(p, with_load)
    return emitter_output_stage(p, with_load)


def open_loop_stage(p: AmplifierParams) -> Circuit:
    """The collector output stage with the emitter sense path cut.

    The op-amp input is driven by a 1 V source, the gain source sees the input
    only and r_o is left out, so i_o = v(e) / R1.
    """
    elements: list[Element] = [
        VSource("Vin", INPUT_NODE, GROUND, 1.0),
        Vcvs("EK", "thev", GROUND, INPUT_NODE, GROUND, p.K),
        Resistor("ROUT", "thev", "b", p.r_out),
        Resistor("RPI", "b", "e", p.r_pi),
        Vccs("GM", GROUND, "e", "b", "e", p.g_m),
        Resistor(FEEDBACK_RESISTOR, "e", GROUND, p.R1),
    ]
    return Circuit(elements=tuple(elements), title="open loop stage")
