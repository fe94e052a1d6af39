"""Exception hierarchy.

Every domain error derives from :class:`ValgraphError`; the CLI maps these to
exit code 1 and prints the class name.
"""

from __future__ import annotations


class ValgraphError(Exception):
    """Base class for all domain errors."""


class ModelError(ValgraphError, ValueError):
    """A model description violates a structural invariant."""


class CycleError(ModelError):
    pass


class CptError(ModelError):
    pass


class UnknownVariableError(ValgraphError, KeyError):
    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class IncompleteAssignmentError(ValgraphError, ValueError):
    pass


class SameVariableError(ValgraphError, ValueError):
    pass


class ModelTooLargeError(ValgraphError):
    pass


class NotAChildError(ValgraphError, ValueError):
    pass


class RewardError(ValgraphError, ValueError):
    pass


class ObservationError(ValgraphError, ValueError):
    pass


class ConfigError(ValgraphError, ValueError):
    pass


class GridTooLargeError(ValgraphError):
    pass


class UnknownScenarioError(ValgraphError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ParseError(ValgraphError, ValueError):
    """Malformed input document.

    ``line`` and ``column`` are 1-based when known; ``path`` names the
    offending element (e.g. ``variables[1].cpt``) for schema errors.
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, path: str | None = None):
        self.line = line
        self.column = column
        self.path = path
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if path:
            where.append(f"at {path}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
