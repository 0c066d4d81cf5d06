"""Modified nodal analysis over linear circuits."""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
import logging
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import linear_sum_assignment

from .base.circuit import (
    Element,
    ISource,
    LinearCircuit,
    NodePair,
    Resistor,
    Vccs,
    Vcvs,
    VSource,
)
from .base.errors import SingularMatrix, UnknownNode, UnknownSource
from .const import (
    GROUND,
    MAX_REFINEMENT_STEPS,
    REFINEMENT_TOLERANCE,
    RESIDUAL_TOLERANCE,
    TEST_VOLTAGE_SOURCE,
    ZERO_CURRENT_TOLERANCE,
    ZERO_ENTRY_PENALTY,
)
from .smallsignal import zero_sources

_LOGGER = logging.getLogger(__name__)

INFINITE_IMPEDANCE = math.inf


def voltage_variable(node: str) -> str:
    """Return the variable name of a node voltage."""
    return f"v({node})"


def current_variable(name: str) -> str:
    """Return the variable name of a branch current."""
    return f"i({name})"


@dataclass(frozen=True, eq=False)
class MnaSystem:
    """A dense nodal system A x = rhs with named unknowns."""

    matrix: np.ndarray
    rhs: np.ndarray
    index_map: dict[str, int]
    # Right hand side column of each independent source at unit value.
    excitations: dict[str, np.ndarray] = field(default_factory=dict)
    # The same matrix in exact rationals, None when an entry is not finite.
    exact_matrix: np.ndarray | None = None
    title: str = ""

    @property
    def dimension(self) -> int:
        """Return the number of unknowns."""
        return len(self.index_map)

    @property
    def variables(self) -> list[str]:
        """Return the unknowns in row order."""
        return sorted(self.index_map, key=self.index_map.__getitem__)

    def rhs_for(self, values: Mapping[str, float]) -> np.ndarray:
        """Return the right hand side for the given source values."""
        rhs = np.zeros(self.dimension)
        for name, value in values.items():
            if name not in self.excitations:
                raise UnknownSource(name)
            rhs += value * self.excitations[name]
        return rhs


@dataclass(frozen=True)
class Solution:
    """Node voltages and voltage-branch currents of a solved system."""

    node_voltages: dict[str, float]
    branch_currents: dict[str, float]
    residual: float = 0.0

    def voltage(self, node: str) -> float:
        """Return a node voltage, ground is 0."""
        if node == GROUND:
            return 0.0
        try:
            return self.node_voltages[node]
        except KeyError:
            raise UnknownNode(node) from None

    def voltage_between(self, pair: NodePair) -> float:
        """Return v(plus) - v(minus)."""
        return self.voltage(pair[0]) - self.voltage(pair[1])

    def current(self, name: str) -> float:
        """Return the current through a voltage-defined branch, plus to minus."""
        return self.branch_currents[name]


class _Stamper:
    """Collects the stamps of one circuit."""

    def __init__(self, lc: LinearCircuit) -> None:
        """Set up the variable ordering, nodes first in order of appearance."""
        nodes: list[str] = []
        branches: list[str] = []
        for elem in lc.elements:
            for node in elem.terminals:
                if node != GROUND and node not in nodes:
                    nodes.append(node)
            if isinstance(elem, VSource | Vcvs):
                branches.append(elem.name)
        self.index_map: dict[str, int] = {}
        for node in nodes:
            self.index_map[voltage_variable(node)] = len(self.index_map)
        for name in branches:
            self.index_map[current_variable(name)] = len(self.index_map)
        size = len(self.index_map)
        self.matrix = np.zeros((size, size))
        self.exact: np.ndarray | None = np.full(
            (size, size), Fraction(0), dtype=object
        )
        self.excitations: dict[str, np.ndarray] = {}

    def node(self, node: str) -> int | None:
        if node == GROUND:
            return None
        return self.index_map[voltage_variable(node)]

    def add(
        self, row: int | None, col: int | None, value: float | Fraction
    ) -> None:
        if row is None or col is None:
            return
        self.matrix[row, col] += float(value)
        if self.exact is None:
            return
        if isinstance(value, Fraction):
            self.exact[row, col] += value
        elif math.isfinite(value):
            self.exact[row, col] += Fraction(value)
        else:
            self.exact = None

    def transconductance(
        self,
        plus: str,
        minus: str,
        ctrl_plus: str,
        ctrl_minus: str,
        g: float | Fraction,
    ) -> None:
        """Current g v(ctrl) leaves plus and enters minus."""
        p, m = self.node(plus), self.node(minus)
        cp, cm = self.node(ctrl_plus), self.node(ctrl_minus)
        self.add(p, cp, g)
        self.add(p, cm, -g)
        self.add(m, cp, -g)
        self.add(m, cm, g)

    def branch(self, name: str, plus: str, minus: str) -> int:
        """KCL coupling of a voltage-defined branch, returns its row."""
        k = self.index_map[current_variable(name)]
        p, m = self.node(plus), self.node(minus)
        self.add(p, k, 1.0)
        self.add(m, k, -1.0)
        self.add(k, p, 1.0)
        self.add(k, m, -1.0)
        return k

    def stamp(self, elem: Element) -> None:
        size = len(self.index_map)
        match elem:
            case Resistor():
                self.transconductance(
                    elem.n1, elem.n2, elem.n1, elem.n2, _conductance(elem.ohms)
                )
            case Vccs():
                self.transconductance(
                    elem.plus, elem.minus, elem.ctrl_plus, elem.ctrl_minus, elem.siemens
                )
            case ISource():
                column = np.zeros(size)
                p, m = self.node(elem.plus), self.node(elem.minus)
                if p is not None:
                    column[p] -= 1.0
                if m is not None:
                    column[m] += 1.0
                self.excitations[elem.name] = column
            case VSource():
                k = self.branch(elem.name, elem.plus, elem.minus)
                column = np.zeros(size)
                column[k] = 1.0
                self.excitations[elem.name] = column
            case Vcvs():
                k = self.branch(elem.name, elem.plus, elem.minus)
                self.add(k, self.node(elem.ctrl_plus), -elem.gain)
                self.add(k, self.node(elem.ctrl_minus), elem.gain)
            case _:
                raise TypeError(f"{elem.name}: can not stamp {elem.kind}")

    def matrices(self) -> tuple[np.ndarray, np.ndarray | None]:
        """Return the float matrix and its exact counterpart."""
        if self.exact is None:
            return self.matrix, None
        return self.exact.astype(float), self.exact


def _conductance(ohms: float) -> float | Fraction:
    """Return 1/ohms, exact for finite values."""
    if math.isinf(ohms):
        return Fraction(0)
    if math.isnan(ohms):
        return math.nan
    return 1 / Fraction(ohms)


def source_value(elem: Element) -> float:
    """Return the value of an independent source."""
    if isinstance(elem, VSource):
        return elem.volts
    if isinstance(elem, ISource):
        return elem.amps
    raise UnknownSource(elem.name)


def assemble(lc: LinearCircuit) -> MnaSystem:
    """Build the nodal system of a linear circuit, ground eliminated."""
    stamper = _Stamper(lc)
    for elem in lc.elements:
        stamper.stamp(elem)
    matrix, exact = stamper.matrices()
    system = MnaSystem(
        matrix=matrix,
        rhs=np.zeros(len(stamper.index_map)),
        index_map=stamper.index_map,
        excitations=stamper.excitations,
        exact_matrix=exact,
        title=lc.title,
    )
    values = {e.name: source_value(e) for e in lc.sources}
    system = replace(system, rhs=system.rhs_for(values))
    _LOGGER.debug(
        "%s: Assembled %d unknowns, %d sources",
        lc.title or "<circuit>",
        system.dimension,
        len(values),
    )
    return system


def _power_of_two_scale(values: np.ndarray) -> np.ndarray:
    """Return 2**-e so that values * scale lies in [0.5, 1)."""
    _, exponents = np.frexp(values)
    return np.ldexp(1.0, -exponents)


def solve_vector(system: MnaSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs with equilibration and partial pivoting."""
    matrix = system.matrix
    if system.dimension == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(matrix)):
        raise SingularMatrix("matrix has non-finite entries")

    row_max = np.max(np.abs(matrix), axis=1)
    if np.any(row_max == 0):
        empty = [system.variables[i] for i in np.flatnonzero(row_max == 0)]
        raise SingularMatrix(f"empty equations for {', '.join(empty)}")
    row_scale = _power_of_two_scale(row_max)
    scaled = matrix * row_scale[:, None]
    col_max = np.max(np.abs(scaled), axis=0)
    if np.any(col_max == 0):
        unused = [system.variables[i] for i in np.flatnonzero(col_max == 0)]
        raise SingularMatrix(f"unconstrained unknowns {', '.join(unused)}")
    col_scale = _power_of_two_scale(col_max)
    scaled = scaled * col_scale[None, :]

    singular_values = np.linalg.svd(scaled, compute_uv=False)
    smallest = singular_values[-1]
    condition = math.inf if smallest == 0 else singular_values[0] / smallest
    if not np.isfinite(condition) or condition >= 1 / np.finfo(float).eps:
        raise SingularMatrix(
            f"{system.title or '<circuit>'}: condition number {condition:.3g}, "
            "floating subcircuit or contradictory sources"
        )

    factors = lu_factor(scaled, check_finite=False)

    def _solve(b: np.ndarray) -> np.ndarray:
        return col_scale * lu_solve(factors, row_scale * b, check_finite=False)

    x = _solve(rhs)
    if system.exact_matrix is not None and np.all(np.isfinite(rhs)):
        return _refine(system.exact_matrix, rhs, x, _solve, system.title)
    limit = RESIDUAL_TOLERANCE * np.max(np.abs(rhs), initial=0.0)
    residual = np.max(np.abs(rhs - matrix @ x), initial=0.0)
    if residual > limit:
        _LOGGER.warning(
            "%s: Residual %.3g above %.3g, refining once",
            system.title or "<circuit>",
            residual,
            limit,
        )
        x = x + _solve(rhs - matrix @ x)
    return x


def _rational(values: np.ndarray) -> np.ndarray:
    return np.array([Fraction(float(v)) for v in values], dtype=object)


def _refine(
    exact: np.ndarray,
    rhs: np.ndarray,
    x: np.ndarray,
    solve_step: Callable[[np.ndarray], np.ndarray],
    title: str = "",
) -> np.ndarray:
    """Correct x against the exact matrix until the correction stops shrinking.

    The residual is formed in rational arithmetic, so small port currents that
    are differences of much larger branch currents come out to full precision.
    """
    target = _rational(rhs)
    current = _rational(x)
    scale = float(np.max(np.abs(x), initial=0.0))
    previous = math.inf
    for step in range(1, MAX_REFINEMENT_STEPS + 1):
        residual = (target - exact.dot(current)).astype(float)
        correction = solve_step(residual)
        size = float(np.max(np.abs(correction), initial=0.0))
        if not size < previous:
            _LOGGER.debug(
                "%s: Refinement stalled after %d steps at %.3g",
                title or "<circuit>",
                step - 1,
                previous,
            )
            break
        current = current + _rational(correction)
        previous = size
        if size <= REFINEMENT_TOLERANCE * scale:
            break
    else:
        _LOGGER.warning(
            "%s: Refinement still moving after %d steps, last correction %.3g",
            title or "<circuit>",
            MAX_REFINEMENT_STEPS,
            previous,
        )
    return current.astype(float)


def solve(system: MnaSystem) -> Solution:
    """Solve the system for node voltages and branch currents."""
    x = solve_vector(system, system.rhs)
    voltages: dict[str, float] = {GROUND: 0.0}
    currents: dict[str, float] = {}
    for variable, index in system.index_map.items():
        if variable.startswith("v("):
            voltages[variable[2:-1]] = float(x[index])
        else:
            currents[variable[2:-1]] = float(x[index])
    residual = 0.0
    if system.dimension:
        residual = float(np.max(np.abs(system.rhs - system.matrix @ x)))
    return Solution(voltages, currents, residual)


def _check_port(lc: LinearCircuit, port: NodePair) -> None:
    nodes = lc.nodes | {GROUND}
    for node in port:
        if node not in nodes:
            raise UnknownNode(node)


def driving_point_impedance(lc: LinearCircuit, port: NodePair) -> float:
    """Return v/i seen into the port with every independent source zeroed.

    A 1 V test source drives the port, an open port gives INFINITE_IMPEDANCE.
    """
    _check_port(lc, port)
    zeroed = zero_sources(lc)
    name = zeroed.unique_name(TEST_VOLTAGE_SOURCE)
    tested = zeroed.adding(VSource(name, port[0], port[1], 1.0))
    solution = solve(assemble(tested))
    # Branch current flows plus to minus through the source, so the circuit
    # receives the negated current at the plus terminal.
    delivered = -solution.current(name)
    if abs(delivered) <= ZERO_CURRENT_TOLERANCE:
        _LOGGER.warning(
            "%s: No current into port %s-%s, impedance is infinite",
            lc.title or "<circuit>",
            port[0],
            port[1],
        )
        return INFINITE_IMPEDANCE
    return 1.0 / delivered


def transfer(lc: LinearCircuit, source: str, observe: NodePair) -> float:
    """Return the observed voltage per unit value of one independent source."""
    try:
        elem = lc.element(source)
    except KeyError:
        raise UnknownSource(source) from None
    source_value(elem)
    _check_port(lc, observe)
    system = assemble(lc)
    system = replace(system, rhs=system.rhs_for({source: 1.0}))
    return solve(system).voltage_between(observe)


Equation = tuple[str, dict[str, float | Fraction]]


def _ratio(value: float | Fraction, pivot: float | Fraction) -> float | Fraction:
    ratio = value / pivot
    return ratio if isinstance(ratio, Fraction) else float(ratio)


def causal_equations(system: MnaSystem, source: str) -> list[Equation]:
    """Re-express the rows as one explicit equation per unknown.

    Each unknown is solved from the row where it carries the weight picked by
    a maximum-product assignment, so every loop of the resulting flow graph
    has a gain magnitude of at most one. Terms keyed by the source name carry
    the excitation of that source at unit value. Coefficients are exact
    rationals whenever the system has an exact matrix.
    """
    if source not in system.excitations:
        raise UnknownSource(source)
    n = system.dimension
    if n == 0:
        return []
    matrix = system.matrix
    magnitude = np.abs(matrix)
    cost = np.full((n, n), ZERO_ENTRY_PENALTY)
    nonzero = magnitude > 0
    cost[nonzero] = -np.log(magnitude[nonzero])
    rows, cols = linear_sum_assignment(cost)
    if np.any(~nonzero[rows, cols]):
        raise SingularMatrix(f"{system.title or '<circuit>'}: structurally singular")

    entries = matrix if system.exact_matrix is None else system.exact_matrix
    variables = system.variables
    excitation = system.excitations[source]
    equations: list[Equation] = []
    for row, col in sorted(zip(rows, cols, strict=True), key=lambda rc: rc[1]):
        pivot = entries[row, col]
        terms: dict[str, float | Fraction] = {}
        for other in np.flatnonzero(matrix[row]):
            if other == col:
                continue
            terms[variables[other]] = _ratio(-entries[row, other], pivot)
        if excitation[row] != 0:
            terms[source] = _ratio(Fraction(float(excitation[row])), pivot)
        equations.append((variables[col], terms))
    _LOGGER.debug(
        "%s: Causal ordering %s",
        system.title or "<circuit>",
        ", ".join(f"{variables[c]}<-row{r}" for r, c in zip(rows, cols, strict=True)),
    )
    return equations
