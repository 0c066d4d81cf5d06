"""Test the macro expansion."""

import math

import pytest

from ..base.circuit import (
    BjtPi,
    Circuit,
    ISource,
    LinearCircuit,
    OpAmp,
    PortAnnotations,
    Resistor,
    Vccs,
    Vcvs,
    VSource,
)
from ..base.errors import InvalidMacroParams
from ..config.topology import ElementKind
from ..mna import driving_point_impedance
from ..smallsignal import (
    expand_bjt,
    expand_opamp,
    feedback_network,
    linearize,
    non_passive,
    restrict,
    thevenin_node,
    zero_gains,
    zero_sources,
)


def test_expand_bjt() -> None:
    """Test the hybrid-pi primitives of a transistor."""
    q = BjtPi("Q1", "c", "b", "e", 0.04, 2.5e3, 100e3)
    assert q.beta == pytest.approx(100)
    assert expand_bjt(q) == [
        Resistor("Q1_rpi", "b", "e", 2.5e3),
        Vccs("Q1_gm", "c", "e", "b", "e", 0.04),
        Resistor("Q1_ro", "c", "e", 100e3),
    ]


def test_expand_opamp() -> None:
    """Test the Thevenin primitives of an op-amp, rin only when finite."""
    a = OpAmp("A1", "p", "m", "o", 1000, 500e3)
    node = thevenin_node("A1")
    assert node == "A1__thev"
    assert expand_opamp(a) == [
        Vcvs("A1_k", node, "0", "p", "m", 1000),
        Resistor("A1_rout", node, "o", 500e3),
    ]
    with_rin = OpAmp("A1", "p", "m", "o", 1000, 500e3, 1e6)
    assert expand_opamp(with_rin)[-1] == Resistor("A1_rin", "p", "m", 1e6)


@pytest.mark.parametrize(
    "bad",
    [
        BjtPi("Q1", "c", "b", "e", 0.0, 2.5e3, 100e3),
        BjtPi("Q1", "c", "b", "e", 0.04, -1.0, 100e3),
        BjtPi("Q1", "c", "b", "e", 0.04, 2.5e3, math.inf),
        OpAmp("A1", "p", "m", "o", -1, 500e3),
        OpAmp("A1", "p", "m", "o", math.inf, 500e3),
        OpAmp("A1", "p", "m", "o", 1000, 0.0),
        OpAmp("A1", "p", "m", "o", 1000, 500e3, 0.0),
    ],
)
def test_invalid_macro_params(bad) -> None:
    """Test macros that can not be expanded."""
    with pytest.raises(InvalidMacroParams):
        linearize(Circuit(elements=(bad,)))


def test_zero_gain_opamp_is_allowed() -> None:
    """Test K = 0 expands to a dead gain source."""
    expanded = expand_opamp(OpAmp("A1", "p", "m", "o", 0, 1.0))
    assert expanded[0] == Vcvs("A1_k", thevenin_node("A1"), "0", "p", "m", 0)


def test_linearize_provenance(load_fixture) -> None:
    """Test every primitive remembers its macro."""
    circuit = load_fixture("collector_output.net")
    lc = linearize(circuit)
    assert lc.element_names == [
        "Vin",
        "A1_k",
        "A1_rout",
        "Q1_rpi",
        "Q1_gm",
        "Q1_ro",
        "R1",
        "R2",
    ]
    assert lc.origin("Q1_gm") == "Q1"
    assert lc.origin("A1_rout") == "A1"
    assert lc.origin("R1") == "R1"
    assert lc.annotations == circuit.annotations
    assert all(e.kind != ElementKind.BJT_PI for e in lc)


def test_linear_circuit_rejects_macros() -> None:
    """Test a linear circuit can not hold a macro."""
    with pytest.raises(TypeError):
        LinearCircuit(elements=(BjtPi("Q1", "c", "b", "e", 1, 1, 1),))


def test_linearize_keeps_impedance(load_fixture) -> None:
    """Test the macro fixture and the primitive fixture read the same."""
    macro = linearize(load_fixture("collector_output.net"))
    primitive = linearize(load_fixture("collector_output_primitives.net"))
    loaded = driving_point_impedance(macro, ("c", "0"))
    bare = driving_point_impedance(primitive, ("x", "0"))
    assert loaded == pytest.approx(1 / (1 / bare + 1 / 10e3), rel=1e-9)


def test_zero_sources() -> None:
    """Test voltage sources become shorts and current sources disappear."""
    lc = LinearCircuit(
        elements=(
            VSource("V1", "a", "0", 5.0),
            ISource("I1", "0", "b", 1.0),
            Resistor("R1", "a", "b", 1.0),
        ),
        provenance={"R1": "X1"},
    )
    zeroed = zero_sources(lc)
    assert zeroed.element_names == ["V1", "R1"]
    assert zeroed.element("V1") == VSource("V1", "a", "0", 0.0)
    assert zeroed.origin("R1") == "X1"
    assert [e.name for e in zeroed.sources] == ["V1"]


def test_zero_gains(load_fixture) -> None:
    """Test controlled sources keep their place with zero gain."""
    lc = zero_gains(linearize(load_fixture("collector_output.net")))
    assert lc.element("A1_k") == Vcvs("A1_k", thevenin_node("A1"), "0", "in", "e", 0.0)
    assert lc.element("Q1_gm") == Vccs("Q1_gm", "c", "e", "b", "e", 0.0)
    assert non_passive(lc) == ["Vin", "A1_k", "Q1_gm"]


def test_restrict_and_feedback_network(load_fixture) -> None:
    """Test keeping the primitives of named elements."""
    lc = linearize(load_fixture("collector_output.net"))
    assert restrict(lc, ["Q1", "R2"]).element_names == [
        "Q1_rpi",
        "Q1_gm",
        "Q1_ro",
        "R2",
    ]
    network = feedback_network(lc)
    assert network.element_names == ["R1"]
    assert non_passive(network) == []


def test_unique_name() -> None:
    """Test synthesized names avoid existing elements."""
    lc = LinearCircuit(
        elements=(Resistor("VTEST", "a", "0", 1), Resistor("VTEST_1", "a", "0", 1)),
        annotations=PortAnnotations(),
    )
    assert lc.unique_name("VTEST") == "VTEST_2"
    assert lc.unique_name("R9") == "R9"
    assert lc.adding(Resistor("R9", "a", "0", 1)).element_names[-1] == "R9"
