"""Two-body kinematics: lab frame to centre-of-mass / relative coordinates.

Momenta are 3-vectors in internal units (hbar = 1).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = np.array([0.0, 0.0, float(arr)])
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be a finite 3-vector, got {v!r}",
                          op="kinematics.make_kinematics")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Kinematics:
    """Incident particle plus target, split into total and relative motion."""

    m_d: float
    M: float
    m_r: float
    m_s: float
    p_d: np.ndarray
    P: np.ndarray
    p_r: np.ndarray
    p_s: np.ndarray
    E_r: float

    @property
    def p_r_magnitude(self):
        return float(np.linalg.norm(self.p_r))

    def final_lab_momenta(self, p_r_final):
        """Reconstruct (p_d', P') from a final relative momentum at fixed total momentum."""
        p_r_final = np.asarray(p_r_final, dtype=float)
        p_d_final = p_r_final + self.m_d / self.m_s * self.p_s
        P_final = self.p_s - p_d_final
        return p_d_final, P_final


def make_kinematics(m_d, M, p_d, P=(0.0, 0.0, 0.0)):
    """Build :class:`Kinematics` from lab-frame masses and momenta.

    A scalar momentum is taken to point along +z.
    """
    if not (m_d > 0 and M > 0) or not (math.isfinite(m_d) and math.isfinite(M)):
        raise DomainError(f"masses must be positive and finite (m_d={m_d!r}, M={M!r})",
                          op="kinematics.make_kinematics")
    p_d = _vector(p_d, "p_d")
    P = _vector(P, "P")
    m_r = 1.0 / (1.0 / M + 1.0 / m_d)
    m_s = M + m_d
    p_r = (p_d * M - P * m_d) / (m_d + M)
    p_s = P + p_d
    p_r.setflags(write=False)
    p_s.setflags(write=False)
    E_r = float(p_r @ p_r) / (2.0 * m_r)
    return Kinematics(float(m_d), float(M), m_r, m_s, p_d, P, p_r, p_s, E_r)


def relative_kinematics(m_r, E_r):
    """Kinematics with the target at rest, chosen so the reduced mass is ``m_r``
    and the relative energy is ``E_r``.

    Uses equal masses ``m_d = M = 2 m_r``.
    """
    if not m_r > 0:
        raise DomainError(f"m_r must be positive, got {m_r!r}", op="kinematics.relative_kinematics")
    if not E_r >= 0:
        raise DomainError(f"E_r must be non-negative, got {E_r!r}", op="kinematics.relative_kinematics")
    p_r = math.sqrt(2.0 * m_r * E_r)
    # with the target at rest p_r = p_d * M / (m_d + M) = p_d / 2
    return make_kinematics(2.0 * m_r, 2.0 * m_r, (0.0, 0.0, 2.0 * p_r))


def de_broglie_wavelength(p):
    """Return 2 pi hbar / p."""
    p = float(np.linalg.norm(p)) if np.ndim(p) else float(p)
    if p == 0.0:
        raise DomainError("de Broglie wavelength is infinite at zero momentum",
                          op="kinematics.de_broglie_wavelength")
    if not p > 0:
        raise DomainError(f"momentum must be positive, got {p!r}", op="kinematics.de_broglie_wavelength")
    return 2.0 * math.pi / p


def max_momentum_transfer(kin):
    """Largest |p_d - p_d'| allowed by elastic scattering, 2 |p_r|."""
    return 2.0 * kin.p_r_magnitude
