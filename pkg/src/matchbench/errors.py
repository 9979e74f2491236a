"""Exception hierarchy shared across the package."""


class MatchbenchError(Exception):
    """Base class for all matchbench errors."""


class ValidationError(MatchbenchError):
    """Input violates a documented precondition (bad header, empty file, ...)."""


class CsvParseError(MatchbenchError):
    """Malformed CSV input; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownAttributeError(MatchbenchError):
    """An operation referenced an attribute name not present in the dataset."""


class UnknownMatcherError(MatchbenchError):
    """An operation referenced a matcher id that is not registered."""


class UnknownSessionError(MatchbenchError):
    """An operation referenced a session id with no stored session."""


class UnknownCandidateError(MatchbenchError):
    """An operation referenced a (source, target) pair with no candidate."""


class ConflictError(MatchbenchError):
    """Accepting would violate the one-to-one ground-truth invariant."""


class EngineError(MatchbenchError):
    """All matchers failed; carries per-matcher failure reasons."""

    def __init__(self, reasons: dict[str, str]):
        self.reasons = dict(reasons)
        detail = "; ".join(f"{m}: {r}" for m, r in sorted(self.reasons.items()))
        super().__init__(f"all matchers failed ({detail})")


class NoFitError(MatchbenchError):
    """Affine fit impossible (fewer than two distinct source values)."""


class ExportError(MatchbenchError):
    """Nothing to export for the requested kind."""


class PluginError(MatchbenchError):
    """External matcher violated the wire protocol; the reason is recorded."""
