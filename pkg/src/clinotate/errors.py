"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` string; the HTTP layer and the CLI
surface that code verbatim, so renaming one is a wire-format change.
"""


class ClinotateError(Exception):
    code = "Error"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail


class ParseError(ClinotateError):
    code = "ParseError"


class ValidationError(ClinotateError):
    """Catalog failed validation; ``violations`` holds the full list."""

    code = "ValidationError"

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(detail)


class UnknownNodeError(ClinotateError):
    code = "UnknownNode"


class CrossingSpanError(ClinotateError):
    code = "CrossingSpan"


class InapplicableModifierError(ClinotateError):
    code = "InapplicableModifier"


class DuplicateMentionError(ClinotateError):
    code = "DuplicateMention"


class OutOfBoundsError(ClinotateError):
    code = "OutOfBounds"


class BadRatiosError(ClinotateError):
    code = "BadRatios"


class BadConfigError(ClinotateError):
    code = "BadConfig"


class DocMismatchError(ClinotateError):
    code = "DocMismatch"


class NoOverlapError(ClinotateError):
    code = "NoOverlap"


class TerminalStateError(ClinotateError):
    code = "Terminal"


class InvalidActionError(ClinotateError):
    code = "InvalidAction"


class CrossingGoldError(ClinotateError):
    code = "CrossingGold"


class NotDerivableError(ClinotateError):
    code = "NotDerivable"


class EmptyCorpusError(ClinotateError):
    code = "EmptyCorpus"


class OntologyMismatchError(ClinotateError):
    code = "OntologyMismatch"


class FormatError(ClinotateError):
    code = "FormatError"


class VersionMismatchError(ClinotateError):
    code = "VersionMismatch"


class MissingMetadataError(ClinotateError):
    code = "MissingMetadata"


class EmptyQueryError(ClinotateError):
    code = "EmptyQuery"
