"""
Error types for the hybrid Bell simulator
Parameter-domain failures and numerical failures are kept apart so the CLI can map them to exit codes
"""
from typing import Optional


class HybridBellError(Exception):
    """Base class for every error raised by this package"""


class DomainError(HybridBellError, ValueError):
    """A parameter lies outside its physical or declared domain"""


class NumericalError(HybridBellError, ArithmeticError):
    """A numerical routine did not reach its tolerance"""

    def __init__(self, message: str, achieved_tolerance: Optional[float] = None):
        if achieved_tolerance is not None:
            message = f"{message} (achieved tolerance {achieved_tolerance:.3e})"
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance
