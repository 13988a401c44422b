"""Runtime helpers."""

from .pool import JobFailure, RepetitionPool

__all__ = ["JobFailure", "RepetitionPool"]
