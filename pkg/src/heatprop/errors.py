"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid input: malformed graphs, files, parameters or options."""


class IsolatedNodeError(ValidationError):
    """A graph construction left one or more nodes with zero degree."""

    def __init__(self, message: str, nodes: list[int]):
        super().__init__(message)
        self.nodes = nodes


class NumericalError(RuntimeError):
    """A numerical procedure failed: singular system, non-convergence,
    or a generator that could not produce a valid sample."""
