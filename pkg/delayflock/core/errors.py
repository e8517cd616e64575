"""
Exception taxonomy for the simulator.
"""
from typing import Optional


class FlockError(Exception):
    """Base class for all simulator errors."""


class DomainError(FlockError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigValidationError(FlockError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        """
        Initialize the error.

        Args:
            message: Human-readable reason
            field: Dotted location of the offending field, if known
            line: Line number in the config file, if known
        """
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field {field}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class IntegrationFault(FlockError, RuntimeError):
    """The integrator produced a state it cannot continue from."""

    def __init__(self, message: str, time: float):
        """
        Initialize the fault.

        Args:
            message: What went wrong
            time: First simulation time at which the state was bad
        """
        self.time = time
        super().__init__(f"{message} at t={time!r}")
