"""
Kicked rotor exceptions.
"""

from typing import Optional


class KickedRotorError(Exception):
    """Base exception for the kicked rotor simulator."""
    pass


class ConfigError(KickedRotorError):
    """Run configuration is invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class NumericalError(KickedRotorError):
    """A run lost numerical quality."""
    pass


class NormDriftError(NumericalError):
    """Cumulative norm drift exceeded the abort threshold."""

    def __init__(self, message: str, drift: float):
        super().__init__(message)
        self.drift = drift


class GridLimitError(NumericalError):
    """Momentum lattice would grow past the hard cap."""

    def __init__(self, message: str, sites: int):
        super().__init__(message)
        self.sites = sites


class FitError(NumericalError):
    """Power-law fit rejected."""

    def __init__(self, message: str, points: int = 0):
        super().__init__(message)
        self.points = points


class VerificationError(KickedRotorError):
    """One or more verification checks failed."""

    def __init__(self, message: str, failed: Optional[list] = None):
        super().__init__(message)
        self.failed = failed or []
