"""Exception hierarchy shared across the toolkit.

Every validation error carries enough context (a JSON path or a line
number) to locate the offending input without a stack trace.
"""

from __future__ import annotations


class DashbenchError(Exception):
    """Base class for all toolkit errors."""


class SpecSyntaxError(DashbenchError):
    """Input is not syntactically valid JSON."""


class SchemaError(DashbenchError):
    """Document parses as JSON but violates the spec schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingReference(SchemaError):
    """A relationship names an element or attribute that does not exist."""


class UnsupportedPredicate(DashbenchError):
    """Predicate form outside the supported operator set (Vega expression
    strings and selection/parameter predicates are rejected, not evaluated)."""


class IllFormedEvent(DashbenchError):
    """An interaction-log line fails validation."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownRelationship(DashbenchError):
    """Event references a relationship the interface does not declare."""


class UnknownElement(DashbenchError):
    """Interface manipulation targets an element that does not exist."""


class WildcardViolation(DashbenchError):
    """Interface manipulation not permitted by the element's wildcard."""


class EmptyFieldList(DashbenchError):
    """A node reached the compiler with nothing to select."""


class DialectError(DashbenchError):
    """SQL statement falls outside the supported dialect subset."""


class DomainMissing(DashbenchError):
    """Simulation needs a value domain that was not supplied."""


class ConfigError(DashbenchError):
    """Invalid driver or user-model configuration."""


class DriverConnectionError(DashbenchError):
    """Could not reach the target DBMS before any batch ran."""


class HeaderMismatch(DashbenchError):
    """CSV header does not match the database spec's attribute names."""


class WorkloadError(DashbenchError):
    """Workload generation failed at a specific event; the original error
    is chained as __cause__."""

    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"event {index}: {cause}")
