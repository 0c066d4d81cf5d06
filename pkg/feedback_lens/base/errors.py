"""Errors raised by the feedback circuit analysis."""

from collections.abc import Sequence


class FeedbackLensError(Exception):
    """Base class for all analysis errors."""


class NetlistError(FeedbackLensError):
    """A netlist statement that can not be read, with its location."""

    def __init__(
        self,
        reason: str,
        line: int,
        column: int | None = None,
        filename: str | None = None,
    ) -> None:
        """Remember where the problem was."""
        super().__init__(reason)
        self.reason = reason
        self.line = line
        self.column = column
        self.filename = filename

    def __str__(self) -> str:
        """Render as file:line: message."""
        where = f"{self.filename or '<netlist>'}:{self.line}"
        if self.column is not None:
            return f"{where}: {self.reason} (column {self.column})"
        return f"{where}: {self.reason}"


class NetlistSyntaxError(NetlistError):
    """The statement does not follow the grammar."""


class DuplicateName(NetlistError):
    """Two elements share a name."""

    def __init__(self, name: str, line: int, column: int | None = None) -> None:
        """Set up the duplicate name error."""
        super().__init__(f"duplicate element name {name!r}", line, column)
        self.name = name


class UnknownElementKind(NetlistError):
    """The element letter is not one we know."""

    def __init__(self, token: str, line: int, column: int | None = None) -> None:
        """Set up the unknown element error."""
        super().__init__(f"unknown element kind {token!r}", line, column)
        self.token = token


class InvalidMacroParams(FeedbackLensError):
    """A device macro has parameters it can not be expanded with."""

    def __init__(self, name: str, detail: str) -> None:
        """Set up the macro error."""
        super().__init__(f"{name}: {detail}")
        self.name = name


class SingularMatrix(FeedbackLensError):
    """The nodal system has no unique solution."""


class UnknownSource(FeedbackLensError):
    """The named element is not an independent source."""

    def __init__(self, name: str) -> None:
        """Set up the unknown source error."""
        super().__init__(f"{name} is not an independent source")
        self.name = name


class UnknownNode(FeedbackLensError):
    """The node is not part of the circuit."""

    def __init__(self, node: str) -> None:
        """Set up the unknown node error."""
        super().__init__(f"unknown node {node!r}")
        self.node = node


class MultipleDefinitions(FeedbackLensError):
    """A flow graph variable is defined by more than one equation."""

    def __init__(self, variable: str) -> None:
        """Set up the error."""
        super().__init__(f"{variable} is defined more than once")
        self.variable = variable


class LimitExceeded(FeedbackLensError):
    """Too many loops or paths to enumerate."""

    def __init__(self, limit: int, what: str = "cycles") -> None:
        """Set up the error."""
        super().__init__(f"more than {limit} {what}")
        self.limit = limit


class ZeroDeterminant(FeedbackLensError):
    """The flow graph determinant vanishes."""


class NonFiniteGain(FeedbackLensError, ValueError):
    """A flow graph edge gain is not finite."""


class UnclassifiableTopology(FeedbackLensError):
    """The feedback network meets the ports in no known way."""


class NonPassiveFeedback(FeedbackLensError):
    """The feedback network holds sources or controlled sources."""

    def __init__(self, names: Sequence[str]) -> None:
        """Set up the error."""
        super().__init__(f"feedback network is not passive: {', '.join(names)}")
        self.names = list(names)


class ConfigError(FeedbackLensError):
    """Configuration values failed validation."""


class EngineError(FeedbackLensError):
    """An engine failed while computing a cross check value."""

    def __init__(self, engine: str, cause: BaseException) -> None:
        """Set up the error with the engine that failed."""
        super().__init__(f"{engine}: {cause}")
        self.engine = engine
        self.cause = cause
