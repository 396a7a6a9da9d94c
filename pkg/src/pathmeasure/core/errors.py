"""Error types raised by the path-measure library"""
from __future__ import annotations

from typing import Any, List, Optional, Sequence


class PathMeasureError(Exception):
    """Base class for every error the library raises on purpose."""


class DomainError(PathMeasureError, ValueError):
    """A precondition of an operation was violated.

    `key` names the config key the offending value came from, when the
    value was read from an experiment config.
    """

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None) -> None:
        super().__init__(message)
        self.message = message
        self.key = key
        self.line = line

    def __str__(self) -> str:
        if self.key is None:
            return self.message
        where = f"line {self.line}, " if self.line is not None else ""
        return f"{self.message} ({where}key '{self.key}')"


class NumericalError(PathMeasureError, ArithmeticError):
    """Quadrature produced something that cannot be trusted."""

    def __init__(self, message: str, node: Any = None) -> None:
        super().__init__(message)
        self.message = message
        self.node = node

    def __str__(self) -> str:
        if self.node is None:
            return self.message
        return f"{self.message} at node {self.node}"


class ConfigError(PathMeasureError, ValueError):
    """An experiment config failed validation. Carries every problem found."""

    def __init__(self, messages: Sequence[str]) -> None:
        self.messages: List[str] = list(messages)
        super().__init__("; ".join(self.messages))
