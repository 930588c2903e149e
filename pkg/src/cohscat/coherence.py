"""Admissibility checks for coherent scattering.

Momenta and lengths are in internal units (hbar = 1). "Much smaller than" is
read as ``ratio <= epsilon`` with the boundary included.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .potentials import mean_potential

DEFAULT_EPSILON = 0.1
_UNCERTAINTY_SLACK = 1e-12


def _check_epsilon(epsilon, op):
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}", op=op)


def _check_length(L, op):
    if not (L >= 0 and math.isfinite(L)):
        raise DomainError(f"target size must be non-negative, got {L!r}", op=op)


@dataclass(frozen=True)
class WavePacket:
    """First and second momentum moments of a single-particle packet.

    ``position_spread`` is optional; when given it must respect
    dx * dp >= 1/2.
    """

    mean_momentum: float
    momentum_spread: float
    position_spread: float = None

    def __post_init__(self):
        if not self.momentum_spread >= 0:
            raise DomainError("momentum spread must be non-negative", op="coherence.WavePacket")
        if not self.mean_momentum >= 0:
            raise DomainError("mean momentum is a magnitude and must be non-negative",
                              op="coherence.WavePacket")
        if self.position_spread is not None:
            if not self.position_spread > 0:
                raise DomainError("position spread must be positive", op="coherence.WavePacket")
            if self.position_spread * self.momentum_spread < 0.5 * (1.0 - _UNCERTAINTY_SLACK):
                raise DomainError("packet violates the uncertainty relation dx*dp >= 1/2",
                                  op="coherence.WavePacket")

    @classmethod
    def minimal(cls, mean_momentum, position_spread):
        """Minimal-uncertainty packet, dp = 1 / (2 dx)."""
        return cls(mean_momentum, 0.5 / position_spread, position_spread)

    @property
    def second_moment(self):
        return self.momentum_spread**2 + self.mean_momentum**2


@dataclass(frozen=True)
class PacketEnsemble:
    """Statistical mixture of packets with positive weights summing to one."""

    weights: tuple
    members: tuple

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        members = tuple(self.members)
        if not members or len(weights) != len(members):
            raise DomainError("ensemble needs matching, non-empty weights and members",
                              op="coherence.PacketEnsemble")
        if any(not w > 0 for w in weights):
            raise DomainError("weights must be positive", op="coherence.PacketEnsemble")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {math.fsum(weights)!r}, not 1",
                              op="coherence.PacketEnsemble")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "members", members)

    @property
    def second_moment(self):
        """<p^2> of the mixture, sum_i w_i (dp_i^2 + <p>_i^2)."""
        return math.fsum(w * m.second_moment for w, m in zip(self.weights, self.members))


@dataclass(frozen=True)
class CoherenceVerdict:
    coherent: bool
    ratio: float
    epsilon: float
    position_spread: float = None
    second_moment: float = None


def plane_wave_coherent(p_r, L, epsilon=DEFAULT_EPSILON):
    """Plane-wave test: the largest momentum transfer 2 |p_r| times L against epsilon."""
    op = "coherence.plane_wave_coherent"
    _check_epsilon(epsilon, op)
    _check_length(L, op)
    if not p_r >= 0:
        raise DomainError("p_r must be non-negative", op=op)
    ratio = 2.0 * p_r * L
    return CoherenceVerdict(ratio <= epsilon, ratio, epsilon)


def packet_coherent(wp, L, epsilon=DEFAULT_EPSILON):
    """Wave-packet test with the largest significant momentum taken as <p> + dp.

    Also reports the minimal position spread 1/(2 dp) implied by the
    uncertainty relation (infinite for dp = 0).
    """
    op = "coherence.packet_coherent"
    _check_epsilon(epsilon, op)
    _check_length(L, op)
    ratio = (wp.mean_momentum + wp.momentum_spread) * L
    dx = math.inf if wp.momentum_spread == 0 else 0.5 / wp.momentum_spread
    return CoherenceVerdict(ratio <= epsilon, ratio, epsilon, position_spread=dx)


def ensemble_coherent(ens, L, epsilon=DEFAULT_EPSILON):
    """Mixture test on the second moment: <p^2> L^2 <= epsilon^2.

    The reported ratio is sqrt(<p^2>) L, comparable to epsilon.
    """
    op = "coherence.ensemble_coherent"
    _check_epsilon(epsilon, op)
    _check_length(L, op)
    m2 = ens.second_moment
    return CoherenceVerdict(m2 * L * L <= epsilon * epsilon, math.sqrt(m2) * L, epsilon,
                            second_moment=m2)


@dataclass(frozen=True)
class DecompositionCheck:
    holds: bool
    applicable: bool
    second_moment: float
    bound: float


def small_packet_decomposition_violates(ens, L):
    """Check that a mixture of packets narrower than ``L`` cannot pass as coherent.

    When every member has position spread below ``L``, each has
    dp > 1/(2L), so <p^2> of the mixture must exceed 1/(4 L^2). ``holds``
    reports whether that bound is met; when some member is not narrower than
    ``L`` the statement does not apply and the result is vacuously true.
    """
    op = "coherence.small_packet_decomposition_violates"
    if not L > 0:
        raise DomainError("target size must be positive", op=op)
    spreads = [m.position_spread for m in ens.members]
    if any(dx is None for dx in spreads):
        raise DomainError("every member needs a position spread", op=op)
    m2 = ens.second_moment
    bound = 0.25 / (L * L)
    if not all(dx < L for dx in spreads):
        return DecompositionCheck(True, False, m2, bound)
    return DecompositionCheck(m2 > bound, True, m2, bound)


class Validity(enum.Enum):
    VALID = "valid"
    MARGINAL = "marginal"
    INVALID = "invalid"


@dataclass(frozen=True)
class BornValidity:
    verdict: Validity
    ratio: float


def _classify(ratio):
    if ratio <= 0.1:
        return Validity.VALID
    if ratio <= 1.0:
        return Validity.MARGINAL
    return Validity.INVALID


def born_validity(pot, kin, R_extent):
    """Perturbative-regime estimate: mean potential times range, over the relative velocity.

    ratio = Vbar R / (|p_r| / m_r), where Vbar is the volume average of |V|
    over a ball of radius ``R_extent``. Below 0.1 is valid, up to 1 marginal.
    """
    if not R_extent > 0:
        raise DomainError("R_extent must be positive", op="coherence.born_validity")
    vbar = mean_potential(pot, R_extent)
    if vbar == 0:
        return BornValidity(Validity.VALID, 0.0)
    p = kin.p_r_magnitude
    ratio = math.inf if p == 0 else vbar * R_extent * kin.m_r / p
    return BornValidity(_classify(ratio), ratio)


def born_validity_1d(beta):
    """Delta-potential analogue: coupling over velocity is 1/beta."""
    beta = float(np.abs(beta))
    ratio = math.inf if beta == 0 else 1.0 / beta
    return BornValidity(_classify(ratio), ratio)
