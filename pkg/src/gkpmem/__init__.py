"""Cavity-mediated memory/GKP hybrid gates, state transfer and GKP-assisted entanglement rates."""

__version__ = "0.1.0"

from .errors import ConditioningError, ParameterError, UnsupportedError  # noqa: E402

__all__ = ["__version__", "ConditioningError", "ParameterError", "UnsupportedError"]
