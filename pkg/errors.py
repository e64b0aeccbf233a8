"""
Exception hierarchy for the toolkit
Each class carries the CLI exit code it maps to.
"""

from typing import Any, Dict, Optional


class ToolkitError(Exception):
    """Base class for every error the toolkit raises on purpose"""

    exit_code = 2

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.witness = witness or {}


class InvalidInput(ToolkitError):
    """Malformed spec, bad literal or violated precondition"""

    exit_code = 2


class CapExceeded(ToolkitError):
    """A configured desk-scale cap was hit"""

    exit_code = 3


class PropertyViolation(ToolkitError):
    """A checked mathematical property failed; the witness is the counterexample"""

    exit_code = 1


def check(condition: bool, message: str, **witness: Any) -> None:
    """Raise PropertyViolation with the given witness unless condition holds"""
    if not condition:
        raise PropertyViolation(message, witness)


def require(condition: bool, message: str, **witness: Any) -> None:
    """Raise InvalidInput unless condition holds"""
    if not condition:
        raise InvalidInput(message, witness)


def ensure_cap(size: int, cap: int, what: str) -> None:
    """Raise CapExceeded when size is over cap"""
    if size > cap:
        raise CapExceeded(f"{what}: {size} exceeds cap {cap}", {"size": size, "cap": cap})
