"""Error types shared across NOL-GAT."""

from __future__ import annotations

from typing import Any, Dict, Optional


class NolGatError(Exception):
    """Base error; ``exit_code`` is what the CLI returns when it surfaces."""

    exit_code = 1


class ConfigError(NolGatError, ValueError):
    exit_code = 2


class DataError(NolGatError, ValueError):
    exit_code = 3


class ShapeError(NolGatError, ValueError):
    """Raised by diffcore when operand shapes do not fit an operation kind."""

    exit_code = 3

    def __init__(self, kind: str, shapes: Any, detail: str = "") -> None:
        self.kind = kind
        self.shapes = shapes
        message = f"{kind}: incompatible shapes {shapes}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class NumericalError(NolGatError, ArithmeticError):
    exit_code = 4


class StageError(NolGatError):
    """A pipeline stage failed; keeps the cause's exit code."""

    def __init__(self, stage: str, cause: NolGatError, config_echo: Optional[Dict[str, Any]] = None) -> None:
        self.stage = stage
        self.cause = cause
        self.config_echo = config_echo or {}
        self.exit_code = cause.exit_code
        message = f"stage '{stage}' failed: {cause}"
        if config_echo:
            message += f" | config: {config_echo}"
        super().__init__(message)


__all__ = [
    "ConfigError",
    "DataError",
    "NolGatError",
    "NumericalError",
    "ShapeError",
    "StageError",
]
