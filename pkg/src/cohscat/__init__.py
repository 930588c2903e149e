"""Coherent scattering in non-relativistic quantum mechanics.

Exact 1D delta-array scattering, first-order Born cross sections for
composite targets, coherence predicates, the Rutherford limit and angular
Monte Carlo sampling. Internal units set hbar = 1.
"""

from .errors import (ConfigError, DomainError, ForwardDivergenceError, QuadratureError,
                     ScatteringError, SingularSystemError)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "ForwardDivergenceError",
    "QuadratureError",
    "ScatteringError",
    "SingularSystemError",
]
