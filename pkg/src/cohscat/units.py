"""Unit convention.

All computations inside the package are done in units where hbar = 1. A
:class:`UnitSystem` fixes the SI size of the internal length, energy and mass
units; because hbar = 1 only two of them are independent, and the three are
checked for consistency on construction.
"""

import math
from dataclasses import dataclass

from scipy import constants as _c

from .errors import DomainError

HBAR_SI = _c.hbar
ELEMENTARY_CHARGE = _c.e
VACUUM_PERMITTIVITY = _c.epsilon_0
MEV = _c.mega * _c.electron_volt
FERMI = _c.femto

# exponents of (length, energy, mass) for each supported dimension
_DIMENSIONS = {
    "dimensionless": (0.0, 0.0, 0.0),
    "length": (1.0, 0.0, 0.0),
    "energy": (0.0, 1.0, 0.0),
    "mass": (0.0, 0.0, 1.0),
    "momentum": (0.0, 0.5, 0.5),
    "wavenumber": (-1.0, 0.0, 0.0),
    "time": (1.0, -0.5, 0.5),
    "area": (2.0, 0.0, 0.0),
    "coupling": (1.0, 1.0, 0.0),  # energy * length, e.g. Coulomb g or a 1D delta strength
    "action": (1.0, 0.5, 0.5),
}


@dataclass(frozen=True)
class UnitSystem:
    """SI sizes of the internal length, energy and mass units.

    Parameters
    ----------
    length_scale : float
        Internal length unit in metres.
    energy_scale : float
        Internal energy unit in joules.
    mass_scale : float
        Internal mass unit in kilograms.
    """

    length_scale: float
    energy_scale: float
    mass_scale: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("length_scale", "energy_scale", "mass_scale"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}",
                                  op="units.UnitSystem")
        if self.hbar != 1.0:
            raise DomainError("internal hbar is fixed to 1", op="units.UnitSystem")
        implied = self.length_scale * math.sqrt(self.mass_scale * self.energy_scale)
        if not math.isclose(implied, HBAR_SI, rel_tol=1e-9):
            raise DomainError(
                "scales are inconsistent with hbar = 1: "
                f"L*sqrt(M*E) = {implied:.6e} J s, expected {HBAR_SI:.6e}",
                op="units.UnitSystem",
            )

    @classmethod
    def from_length_energy(cls, length_scale, energy_scale):
        mass = HBAR_SI**2 / (energy_scale * length_scale**2)
        return cls(length_scale, energy_scale, mass)

    @classmethod
    def nuclear(cls):
        """Femtometre and MeV; the mass unit comes out near 41.8 proton masses."""
        return cls.from_length_energy(FERMI, MEV)

    @classmethod
    def atomic(cls):
        """Hartree atomic units (bohr, hartree, electron mass)."""
        return cls.from_length_energy(_c.physical_constants["Bohr radius"][0],
                                      _c.physical_constants["Hartree energy"][0])

    def scale(self, dimension):
        """SI size of one internal unit of ``dimension``."""
        try:
            a, b, c = _DIMENSIONS[dimension]
        except KeyError:
            raise DomainError(f"unknown dimension {dimension!r}", op="units.scale") from None
        return self.length_scale**a * self.energy_scale**b * self.mass_scale**c

    def to_internal(self, value, dimension):
        return value / self.scale(dimension)

    def from_internal(self, value, dimension):
        return value * self.scale(dimension)


def alpha_proton_coupling():
    """Coulomb coupling between an alpha particle and one proton, e^2/(2 pi eps0), in J m."""
    return ELEMENTARY_CHARGE**2 / (2.0 * math.pi * VACUUM_PERMITTIVITY)
