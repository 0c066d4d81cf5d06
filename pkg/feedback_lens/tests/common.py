"""Common code for running the tests."""

from collections.abc import Sequence
import math
import random

import numpy as np

from ..base.circuit import Resistor
from ..config.amplifier_params import AmplifierParams
from ..sfg import FlowGraph

# Node names of the hand drawn flow graphs.
V_X, I_X, I_O, V_C, V_PI, V_DIFF = "v_X", "i_X", "i_o", "v_C", "v_pi", "v_diff"


def log_uniform(rng: random.Random, low: float, high: float) -> float:
    """Draw a value spread evenly over the decades between low and high."""
    return math.exp(rng.uniform(math.log(low), math.log(high)))


# Ranges of the engine agreement checks, all drawn log-uniform.
RESISTANCE_RANGE = (10.0, 1e7)
TRANSCONDUCTANCE_RANGE = (1e-4, 1.0)
BETA_RANGE = (20.0, 500.0)
GAIN_RANGE = (10.0, 1e5)


def random_params(rng: random.Random) -> AmplifierParams:
    """Draw a parameter set, r_pi following from beta / g_m."""
    g_m = log_uniform(rng, *TRANSCONDUCTANCE_RANGE)
    beta = log_uniform(rng, *BETA_RANGE)
    return AmplifierParams.from_config(
        {
            "K": log_uniform(rng, *GAIN_RANGE),
            "r_out": log_uniform(rng, *RESISTANCE_RANGE),
            "R1": log_uniform(rng, *RESISTANCE_RANGE),
            "R2": log_uniform(rng, *RESISTANCE_RANGE),
            "g_m": g_m,
            "r_pi": beta / g_m,
            "r_o": log_uniform(rng, *RESISTANCE_RANGE),
        }
    )


def conductance_matrix(
    resistors: Sequence[Resistor], nodes: Sequence[str]
) -> np.ndarray:
    """Build the nodal conductance matrix of resistors, ground eliminated."""
    index = {node: i for i, node in enumerate(nodes)}
    matrix = np.zeros((len(nodes), len(nodes)))
    for r in resistors:
        g = 1 / r.ohms
        a, b = index.get(r.n1), index.get(r.n2)
        if a is not None:
            matrix[a, a] += g
        if b is not None:
            matrix[b, b] += g
        if a is not None and b is not None:
            matrix[a, b] -= g
            matrix[b, a] -= g
    return matrix


def oracle_impedance(
    resistors: Sequence[Resistor], nodes: Sequence[str], port: str
) -> float:
    """Impedance from a port node to ground by inverting the conductance matrix."""
    matrix = conductance_matrix(resistors, nodes)
    inverse = np.linalg.inv(matrix)
    i = list(nodes).index(port)
    return float(inverse[i, i])


def random_ladder(
    rng: random.Random,
    nodes: Sequence[str],
    extra: int = 4,
    low: float = 100,
    high: float = 10e3,
) -> list[Resistor]:
    """A connected random resistor network, every node tied towards ground."""
    resistors: list[Resistor] = []
    previous = "0"
    for index, node in enumerate(nodes):
        resistors.append(
            Resistor(f"RS{index}", previous, node, log_uniform(rng, low, high))
        )
        previous = node
    for index in range(extra):
        a, b = rng.sample(["0", *nodes], 2)
        resistors.append(Resistor(f"RX{index}", a, b, log_uniform(rng, low, high)))
    return resistors


def collector_output_graph(p: AmplifierParams) -> FlowGraph:
    """The flow graph of the collector output stage, v_X in and i_X out."""
    s = p.r_out + p.r_pi
    graph = FlowGraph("collector output stage")
    graph.add_edge(V_PI, I_O, p.g_m + 1 / p.r_pi)
    graph.add_edge(V_X, I_O, 1 / p.r_o)
    graph.add_edge(V_C, I_O, -1 / p.r_o)
    graph.add_edge(I_O, V_C, p.R1)
    graph.add_edge(V_X, I_X, 1 / p.r_o)
    graph.add_edge(V_C, I_X, -1 / p.r_o)
    graph.add_edge(V_PI, I_X, p.g_m)
    graph.add_edge(V_DIFF, V_PI, p.K * p.r_pi / s)
    graph.add_edge(V_C, V_PI, -p.r_pi / s)
    graph.add_edge(I_O, V_DIFF, -p.R1)
    return graph


def emitter_output_graph(p: AmplifierParams) -> FlowGraph:
    """The flow graph of the emitter output stage, i_X in and v_X out."""
    s = p.r_out + p.r_pi
    graph = FlowGraph("emitter output stage")
    graph.add_edge(I_X, V_PI, -1 / p.g_m)
    graph.add_edge(V_C, V_PI, -1 / (p.g_m * p.r_o))
    graph.add_edge(V_X, V_PI, 1 / (p.g_m * p.r_o))
    graph.add_edge(I_O, V_C, p.R1)
    graph.add_edge(I_O, V_X, p.r_o)
    graph.add_edge(V_PI, V_X, p.g_m * p.r_o)
    graph.add_edge(V_C, V_X, 1)
    graph.add_edge(V_PI, V_DIFF, s / (p.K * p.r_pi))
    graph.add_edge(V_X, V_DIFF, 1 / p.K)
    graph.add_edge(V_DIFF, I_O, 1 / p.R1)
    return graph


def random_linear_system(
    rng: random.Random, size: int, density: float = 0.5, scale: float = 0.3
) -> tuple[list[str], np.ndarray]:
    """Return variables x_i and a matrix G so that x = G x + e_0 u.

    Off-diagonal couplings are sparse and small, so the cycle count stays
    modest and I - G is far from singular.
    """
    variables = [f"x{i}" for i in range(size)]
    gains = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i != j and rng.random() < density:
                gains[i, j] = rng.uniform(-scale, scale)
    return variables, gains
