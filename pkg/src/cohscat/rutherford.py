"""Rutherford scattering as the coherent Coulomb limit, and the scintillation-count check.

Each of the Z protons couples to the alpha particle with g = q_alpha e / (4 pi eps0)
= e^2 / (2 pi eps0), so the nucleus carries total coupling G = Z g and

    dsigma/dcos(theta) = G^2 pi / (8 E^2 sin^4(theta/2)) = Z^2 e^4 / (32 pi eps0^2 E^2 sin^4(theta/2)).

Energies are in joules and cross sections in square metres. The alpha is
treated as light compared with the nucleus, so E_r ~ E_alpha and the
relative-frame angle equals the lab angle.
"""

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, ForwardDivergenceError
from .units import alpha_proton_coupling


@dataclass(frozen=True)
class RutherfordRecord:
    material: str
    A: int
    Z: int
    N_scint: float
    reported: float = None

    def __post_init__(self):
        if not (self.A >= self.Z >= 1):
            raise DomainError(f"{self.material}: need A >= Z >= 1", op="rutherford.RutherfordRecord")
        if not self.N_scint > 0:
            raise DomainError(f"{self.material}: scintillation rate must be positive",
                              op="rutherford.RutherfordRecord")


def rutherford_differential(Z, E_alpha, theta_alpha):
    """Rutherford dsigma/dcos(theta) in m^2 for an alpha of energy ``E_alpha`` (J)."""
    op = "rutherford.rutherford_differential"
    theta = np.asarray(theta_alpha, dtype=float)
    E = np.asarray(E_alpha, dtype=float)
    if np.any(theta == 0):
        raise ForwardDivergenceError("Rutherford cross section diverges at theta = 0", op=op)
    if np.any(theta < 0) or np.any(theta > math.pi):
        raise DomainError("theta must lie in (0, pi]", op=op)
    if np.any(E <= 0):
        raise DomainError("alpha energy must be positive", op=op)
    if Z < 0:
        raise DomainError("Z must be non-negative", op=op)
    G = Z * alpha_proton_coupling()
    out = G * G * math.pi / (8.0 * E * E * np.sin(theta / 2.0) ** 4)
    return float(out) if np.ndim(out) == 0 else out


def absorption_correction(A):
    """Relative thickness traversed before absorption, scaling as 1/sqrt(A)."""
    if not A >= 1:
        raise DomainError("mass number must be at least 1", op="rutherford.absorption_correction")
    return 1.0 / math.sqrt(A)


@dataclass(frozen=True)
class Table1Analysis:
    rows: list
    mean: float
    max_deviation: float

    def statistic(self, material):
        return dict(self.rows)[material]

    def spread(self, exclude=(), decimals=None):
        """max - min of the statistic, optionally after rounding to ``decimals``."""
        vals = [s for m, s in self.rows if m not in exclude]
        if decimals is not None:
            vals = [round(v, decimals) for v in vals]
        return max(vals) - min(vals)


def table1_analysis(records):
    """N sqrt(A) / Z^2 per record, with the mean and the largest deviation from it."""
    records = list(records)
    if not records:
        raise DomainError("no records", op="rutherford.table1_analysis")
    rows = [(r.material, r.N_scint / absorption_correction(r.A) / r.Z**2) for r in records]
    stats = [s for _, s in rows]
    mean = math.fsum(stats) / len(stats)
    return Table1Analysis(rows, mean, max(abs(s - mean) for s in stats))


def load_table1(path=None):
    """Read Table I records from CSV (the bundled copy by default)."""
    if path is None:
        text = resources.files("cohscat").joinpath("data/table1.csv").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read table: {exc}", op="rutherford.load_table1") from None
    out = []
    try:
        for row in csv.DictReader(text.splitlines()):
            reported = row.get("reported")
            out.append(RutherfordRecord(
                row["material"], int(row["A"]), int(row["Z"]),
                float(row["N_scint"].replace(",", ".")),
                float(reported.replace(",", ".")) if reported else None))
    except (KeyError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed table row: {exc}", op="rutherford.load_table1") from None
    return out
