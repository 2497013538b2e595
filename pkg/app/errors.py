from __future__ import annotations


class GuardExceeded(RuntimeError):
    """A size guard refused an exhaustive computation."""

    def __init__(self, guard: str, limit: int, value: int) -> None:
        super().__init__(f"{guard} guard exceeded: {value} > {limit}")
        self.guard = guard
        self.limit = limit
        self.value = value


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, limit: int) -> None:
        super().__init__(f"Isomorphism search exceeded node cap of {limit}")
        self.limit = limit


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.reason = message
        self.line = line
        self.column = column

    def shifted(self, line: int, column_offset: int) -> "ScenarioParseError":
        return ScenarioParseError(self.reason, line=line, column=self.column + column_offset)


def check_guard(guard: str, limit: int, value: int) -> None:
    if value > limit:
        raise GuardExceeded(guard, limit, value)
