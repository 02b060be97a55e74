"""Exception hierarchy shared across the pipeline.

Parsing errors carry a `path` describing where in the source document the
problem sits; invariant errors name the offending signal and field so
diagnostics can be printed one-per-line by the CLI.
"""

from __future__ import annotations


class SignalForgeError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(SignalForgeError):
    """A document is structurally invalid (missing field, wrong type)."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        self.raw_message = message
        super().__init__(f"{path}: {message}" if path else message)


class UnsupportedConstruct(SchemaError):
    """A document uses a construct outside the supported subset."""


class InvariantError(SignalForgeError):
    """A parsed value violates a domain invariant.

    `subject` is the offending signal/property name and `field` the field
    that failed, so every message names both.
    """

    def __init__(self, message: str, subject: str = "", field: str = ""):
        self.subject = subject
        self.field = field
        self.raw_message = message
        prefix = " ".join(p for p in (subject, field) if p)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DuplicateName(InvariantError):
    """Two catalog entries share a name."""


class ProviderError(SignalForgeError):
    """Base class for completion-provider failures."""


class SchemaViolation(ProviderError):
    """Provider payload failed output-schema validation after retries."""

    def __init__(self, problems: list[str], attempts: int):
        self.problems = problems
        self.attempts = attempts
        super().__init__(
            f"payload invalid after {attempts} attempt(s): " + "; ".join(problems)
        )


class TransportError(ProviderError):
    """Remote provider unreachable or returned a malformed response."""


class FaultInjected(ProviderError):
    """Raised only by the fault-injecting provider (outage simulation)."""


class DomainError(SignalForgeError):
    """A value falls outside the domain a codec or alignment can handle."""


class EvaluationError(SignalForgeError):
    """A codec expression tree cannot be evaluated (malformed node)."""


class UnknownStrategy(SignalForgeError):
    """Embedding strategy name not one of the supported three."""


class EmptyText(SignalForgeError):
    """Attempted to embed an empty string."""


class NoCandidates(SignalForgeError):
    """Alignment requested against an empty index."""


class UnknownNode(SignalForgeError):
    """Graph operation referenced a node id not in the graph."""


class IdCollision(SignalForgeError):
    """Substitution target id already exists in the graph."""


class UnknownTriple(SignalForgeError):
    """Redundancy query for a triple not present in the graph."""


class InconsistentTransformation(SignalForgeError):
    """Transformation script disagrees with the before/after graphs."""


class MissingAlignment(SignalForgeError):
    """Endpoint generation found no alignment for a response property."""

    def __init__(self, prop: str):
        self.property_name = prop
        super().__init__(f"no alignment for property {prop!r}")


class FlaggedAlignment(SignalForgeError):
    """Endpoint generation refused: a required alignment is still flagged."""

    def __init__(self, prop: str):
        self.property_name = prop
        super().__init__(f"alignment for property {prop!r} is flagged for review")


class FixtureError(SignalForgeError):
    """Evaluation corpus is incomplete or inconsistent."""


class StageFailure(SignalForgeError):
    """A pipeline stage failed; carries the stage name and diagnostics."""

    def __init__(self, stage: str, diagnostics: list[str]):
        self.stage = stage
        self.diagnostics = diagnostics
        super().__init__(f"stage {stage} failed: " + "; ".join(diagnostics))


class InvalidTransition(SignalForgeError):
    """Review decision not allowed from the item's current status."""


class UnknownItem(SignalForgeError):
    """Review item id not found."""


class UsageError(SignalForgeError):
    """Bad command-line invocation (maps to exit code 64)."""
