"""Exception types raised across the package.

Every exception carries a stable ``code`` string and the ``op`` that raised
it, so the command line front end can report failures as machine-readable
JSON.
"""


class ScatteringError(Exception):
    """Base class for all package errors."""

    code = "scattering_error"

    def __init__(self, message, op=None):
        super().__init__(message)
        self.message = message
        self.op = op

    def to_dict(self):
        module, _, name = (self.op or "").rpartition(".")
        return {
            "error": self.code,
            "module": module or None,
            "op": name or None,
            "message": self.message,
        }


class DomainError(ScatteringError, ValueError):
    """An argument lies outside the domain of the operation."""

    code = "domain_error"


class ForwardDivergenceError(DomainError):
    """The Coulomb transform (or a quantity built on it) diverges at zero momentum transfer."""

    code = "forward_divergence"


class QuadratureError(ScatteringError, ArithmeticError):
    """A numerical integral failed to converge."""

    code = "quadrature_failure"


class SingularSystemError(ScatteringError, ArithmeticError):
    """A linear system is singular to working precision."""

    code = "singular_system"


class ConfigError(ScatteringError, ValueError):
    """Malformed command-line input or configuration."""

    code = "config_error"
