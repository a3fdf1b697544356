from __future__ import annotations


class ObdaError(Exception):
    """Base class for every error raised by the package."""


class SchemaError(ObdaError):
    """Unknown relation or attribute, malformed schema, or instance violation."""


class PlanError(ObdaError):
    """Structurally invalid relational expression (e.g. unbound CTE name)."""


class SpecError(ObdaError):
    """Inconsistent OBDA specification or constraint set."""


class ParseError(ObdaError):
    """Syntax error in one of the input languages, with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source:
            where += source
        if line is not None:
            where += f"{':' if where else ''}{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}" if where else message)


class StageError(ObdaError):
    """Wraps an error raised inside one compilation stage."""

    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"[{stage}] {error}")
