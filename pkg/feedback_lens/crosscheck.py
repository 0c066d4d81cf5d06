"""Run the closed form, exact formula, Mason and MNA engines side by side."""

import asyncio
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from itertools import combinations
import json
import logging
from typing import Any, Self

from .base.circuit import ISource, LinearCircuit, NodePair
from .base.errors import EngineError, FeedbackLensError
from .base.reference_circuits import OUTPUT_PORT, reference_circuit
from .config.amplifier_params import AmplifierParams, canonical_param_name
from .config.engine_names import (
    EXACT_ENGINES,
    EngineName,
    FeedbackCase,
    Verdict,
)
from .config.tolerances import Tolerances
from .const import DEFAULT_ENUMERATION_CAP, GROUND, TEST_CURRENT_SOURCE
from .feedback import closed_form_rx, exact_rx
from .mna import (
    assemble,
    causal_equations,
    driving_point_impedance,
    voltage_variable,
)
from .sfg import from_linear_system, mason_gain
from .smallsignal import linearize, zero_sources
from .util import format_engineering, relative_difference

_LOGGER = logging.getLogger(__name__)

EnginePair = tuple[EngineName, EngineName]


def pair_key(pair: EnginePair) -> str:
    """Return the report key of an engine pair."""
    return f"{pair[0]}:{pair[1]}"


def mason_impedance(
    lc: LinearCircuit, port: NodePair, limit: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """Return the port impedance through the flow graph engine.

    A unit test current enters the plus node, the nodal rows are put in causal
    order and Mason's formula gives the port voltage per ampere.
    """
    zeroed = zero_sources(lc)
    name = zeroed.unique_name(TEST_CURRENT_SOURCE)
    tested = zeroed.adding(ISource(name, port[1], port[0], 1.0))
    system = assemble(tested)
    graph = from_linear_system(
        causal_equations(system, name), description=lc.title or "<circuit>"
    )
    value = mason_gain(graph, name, voltage_variable(port[0]), limit)
    if port[1] != GROUND:
        value -= mason_gain(graph, name, voltage_variable(port[1]), limit)
    return value


@dataclass
class CrossCheckReport:
    """One quantity computed by every engine, with errors and a verdict."""

    quantity: str
    case: FeedbackCase
    values: dict[EngineName, float]
    relative_errors: dict[EnginePair, float]
    approximation_error: float
    parameters: AmplifierParams
    tolerances: Tolerances
    verdict: Verdict
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """If the verdict is pass."""
        return self.verdict == Verdict.PASS

    def as_dict(self) -> dict[str, Any]:
        """Return the report as plain JSON types."""
        return {
            "quantity": self.quantity,
            "case": int(self.case),
            "values": {str(k): v for k, v in self.values.items()},
            "relative_errors": {
                pair_key(k): v for k, v in self.relative_errors.items()
            },
            "approximation_error": self.approximation_error,
            "parameters": self.parameters.as_dict(),
            "tolerances": self.tolerances.as_dict(),
            "verdict": str(self.verdict),
            "failures": list(self.failures),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Rebuild a report from as_dict output."""
        errors: dict[EnginePair, float] = {}
        for key, value in data["relative_errors"].items():
            first, second = key.split(":")
            errors[(EngineName(first), EngineName(second))] = value
        return cls(
            quantity=data["quantity"],
            case=FeedbackCase(data["case"]),
            values={EngineName(k): v for k, v in data["values"].items()},
            relative_errors=errors,
            approximation_error=data["approximation_error"],
            parameters=AmplifierParams(**data["parameters"]),
            tolerances=Tolerances(**data["tolerances"]),
            verdict=Verdict(data["verdict"]),
            failures=list(data.get("failures", [])),
        )

    def to_json(self) -> str:
        """Return stable JSON text."""
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def to_table(self) -> str:
        """Return an aligned plain text table."""
        rows: list[tuple[str, str]] = [("quantity", self.quantity)]
        rows.extend(
            (str(engine), f"{format_engineering(value)} Ω")
            for engine, value in self.values.items()
        )
        rows.extend(
            (f"err {pair_key(pair)}", f"{error:.3e}")
            for pair, error in self.relative_errors.items()
        )
        rows.append(("approximation error", f"{100 * self.approximation_error:.3f}%"))
        rows.append(("verdict", str(self.verdict)))
        rows.extend(("failure", failure) for failure in self.failures)
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)


def _run_engine(engine: EngineName, compute: Callable[[], float]) -> float:
    try:
        return compute()
    except (FeedbackLensError, ArithmeticError, ValueError) as err:
        raise EngineError(str(engine), err) from err


def run_case(
    case: FeedbackCase,
    p: AmplifierParams,
    tolerances: Tolerances | None = None,
) -> CrossCheckReport:
    """Compute R_X of a verification stage with every engine and compare."""
    case = FeedbackCase(case)
    tolerances = tolerances or Tolerances()
    lc = linearize(reference_circuit(case, p))

    engines: dict[EngineName, Callable[[], float]] = {
        EngineName.CLOSED_FORM: lambda: closed_form_rx(case, p),
        EngineName.EXACT_FORMULA: lambda: exact_rx(case, p),
        EngineName.MASON: lambda: mason_impedance(
            lc, OUTPUT_PORT, tolerances.enumeration_cap
        ),
        EngineName.MNA: lambda: driving_point_impedance(lc, OUTPUT_PORT),
    }
    values = {
        engine: _run_engine(engine, compute) for engine, compute in engines.items()
    }

    errors: dict[EnginePair, float] = {
        (a, b): relative_difference(values[a], values[b])
        for a, b in combinations(values, 2)
    }
    closed = values[EngineName.CLOSED_FORM]
    exact = values[EngineName.EXACT_FORMULA]
    approximation = abs(closed - exact) / abs(exact)

    failures: list[str] = []
    for a, b in combinations(EXACT_ENGINES, 2):
        if errors[(a, b)] > tolerances.engine_tolerance:
            failures.append(
                f"{pair_key((a, b))} differ by {errors[(a, b)]:.3e} "
                f"> {tolerances.engine_tolerance:.3e}"
            )
    allowed = tolerances.closed_form_tolerance(case)
    if approximation > allowed:
        failures.append(f"closed form error {approximation:.4%} > {allowed:.4%}")

    report = CrossCheckReport(
        quantity=f"R_X case {int(case)}",
        case=case,
        values=values,
        relative_errors=errors,
        approximation_error=approximation,
        parameters=p,
        tolerances=tolerances,
        verdict=Verdict.FAIL if failures else Verdict.PASS,
        failures=failures,
    )
    _LOGGER.debug(
        "%s: %s",
        report.quantity,
        ", ".join(f"{k}={v:.10g}" for k, v in values.items()),
    )
    _LOGGER.info(
        "%s: %s, closed form error %.4f%%",
        report.quantity,
        report.verdict,
        100 * approximation,
    )
    return report


def _grid_params(
    p: AmplifierParams, axis: str, grid: Iterable[float]
) -> list[AmplifierParams]:
    canonical_param_name(axis)
    return [p.with_value(axis, value) for value in grid]


def sweep(
    case: FeedbackCase,
    p: AmplifierParams,
    axis: str,
    grid: Iterable[float],
    tolerances: Tolerances | None = None,
) -> list[CrossCheckReport]:
    """Return one report per grid value of a parameter, in grid order."""
    return [run_case(case, point, tolerances) for point in _grid_params(p, axis, grid)]


async def async_sweep(
    case: FeedbackCase,
    p: AmplifierParams,
    axis: str,
    grid: Iterable[float],
    tolerances: Tolerances | None = None,
) -> list[CrossCheckReport]:
    """Run the grid points in worker threads, reports keep grid order."""
    points = _grid_params(p, axis, grid)
    return list(
        await asyncio.gather(
            *(asyncio.to_thread(run_case, case, point, tolerances) for point in points)
        )
    )


def reports_to_json(reports: Iterable[CrossCheckReport]) -> str:
    """Return stable JSON text for a list of reports."""
    return json.dumps([r.as_dict() for r in reports], sort_keys=True, indent=2)
