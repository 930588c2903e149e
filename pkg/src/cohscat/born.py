"""First-order Born cross sections for point-like and composite targets.

In the coherent limit the target acts as a single point charge ``G`` and

    dsigma/dcos(theta) = G^2 m_r^2 / (2 pi) |V~(q)|^2,   q = sqrt(8 m_r E_r) sin(theta/2)

(internal units, hbar = 1). For a composite target whose constituents sit in
independent Gaussian states, G^2 is replaced by the elastic form-factor
kernel |sum_i g_i F_i(q)|^2, averaged over the azimuth of the momentum
transfer.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, ForwardDivergenceError, QuadratureError


@dataclass(frozen=True)
class Constituent:
    charge: float
    position: tuple = (0.0, 0.0, 0.0)
    spread: float = 0.0


@dataclass(frozen=True)
class GaussianTarget:
    """Bound constituents, each in an isotropic Gaussian state around a mean position."""

    constituents: tuple

    def __post_init__(self):
        cons = tuple(c if isinstance(c, Constituent) else Constituent(*c) for c in self.constituents)
        cons = tuple(Constituent(float(c.charge), tuple(float(x) for x in c.position), float(c.spread))
                     for c in cons)
        if not cons:
            raise DomainError("target needs at least one constituent", op="born.GaussianTarget")
        for c in cons:
            if len(c.position) != 3 or c.spread < 0:
                raise DomainError("constituent needs a 3-vector position and spread >= 0",
                                  op="born.GaussianTarget")
        object.__setattr__(self, "constituents", cons)

    @classmethod
    def point(cls, charges):
        """All constituents at the origin with zero spread."""
        return cls(tuple(Constituent(float(g)) for g in charges))

    @property
    def charges(self):
        return np.array([c.charge for c in self.constituents])

    @property
    def positions(self):
        return np.array([c.position for c in self.constituents], dtype=float)

    @property
    def spreads(self):
        return np.array([c.spread for c in self.constituents], dtype=float)

    @property
    def total_charge(self):
        return math.fsum(c.charge for c in self.constituents)

    @property
    def size(self):
        """Largest distance between mean positions plus twice the largest spread."""
        pos = self.positions
        diff = pos[:, None, :] - pos[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max() + 2.0 * self.spreads.max())

    def describe(self):
        return {"constituents": [
            {"charge": c.charge, "position": list(c.position), "spread": c.spread}
            for c in self.constituents]}


@dataclass
class CrossSectionTable:
    """dsigma/dcos(theta) sampled on an increasing grid of angles in (0, pi]."""

    theta: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    kernel_ratio: np.ndarray = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.theta.ndim != 1 or self.theta.shape != self.values.shape or self.theta.size == 0:
            raise DomainError("theta and values must be matching 1D arrays",
                              op="born.CrossSectionTable")
        if np.any(np.diff(self.theta) <= 0):
            raise DomainError("theta grid must be strictly increasing", op="born.CrossSectionTable")
        if self.theta[0] < 0 or self.theta[-1] > math.pi:
            raise DomainError("angles must lie in [0, pi]", op="born.CrossSectionTable")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise DomainError("cross-section values must be finite and non-negative",
                              op="born.CrossSectionTable")
        if self.kernel_ratio is None:
            self.kernel_ratio = np.ones_like(self.values)
        else:
            self.kernel_ratio = np.asarray(self.kernel_ratio, dtype=float)


def momentum_transfer(kin, theta):
    """|q| for elastic scattering through angle theta in the relative frame."""
    return math.sqrt(8.0 * kin.m_r * kin.E_r) * np.sin(np.asarray(theta, dtype=float) / 2.0)


def _check_theta(theta, op):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi) or np.any(~np.isfinite(theta)):
        raise DomainError("theta must lie in [0, pi]", op=op)
    return theta


def coherent_differential_cross_section(pot, kin, G, theta):
    """Coherent-limit dsigma/dcos(theta) for a point-like target of total coupling ``G``."""
    op = "born.coherent_differential_cross_section"
    theta = _check_theta(theta, op)
    if not kin.E_r > 0:
        raise DomainError("relative energy must be positive", op=op)
    if pot.forward_divergent and np.any(theta == 0):
        raise ForwardDivergenceError("cross section diverges at theta = 0 for a Coulomb potential",
                                     op=op)
    q = momentum_transfer(kin, theta)
    vt = pot.fourier(q)
    out = G * G * kin.m_r**2 / (2.0 * math.pi) * np.abs(vt) ** 2
    return float(out) if np.ndim(out) == 0 else out


def coherent_total_cross_section(pot, kin, G, theta_min=0.0):
    """Integral of the coherent differential cross section over cos(theta) in [-1, cos(theta_min)]."""
    op = "born.coherent_total_cross_section"
    if not 0.0 <= theta_min < math.pi:
        raise DomainError("theta_min must lie in [0, pi)", op=op)
    if pot.forward_divergent and theta_min == 0.0:
        raise ForwardDivergenceError("total Coulomb cross section diverges without an angular cutoff",
                                     op=op)
    if G == 0:
        return 0.0

    def f(c):
        theta = math.acos(min(1.0, max(-1.0, c)))
        return coherent_differential_cross_section(pot, kin, G, theta)

    val, err = integrate.quad(f, -1.0, math.cos(theta_min), epsabs=0.0, epsrel=1e-11, limit=500)
    if not math.isfinite(val) or err > 1e-8 * abs(val):
        raise QuadratureError(f"angular integral did not converge (estimate {val}, error {err})",
                              op=op)
    return val


def _form_factors(target, q):
    """Complex sum_i g_i exp(i q.r_i) exp(-q^2 s_i^2 / 2) for q of shape (..., 3)."""
    q = np.asarray(q, dtype=float)
    q2 = (q * q).sum(-1)
    phase = q @ target.positions.T
    damp = np.exp(-0.5 * q2[..., None] * target.spreads**2)
    return (target.charges * damp * np.exp(1j * phase)).sum(-1)


def transition_kernel(target, q):
    """Elastic form-factor kernel |sum_i g_i F_i(q)|^2 for a momentum-transfer vector ``q``.

    Equals G^2 at q = 0. ``q`` may carry leading batch dimensions.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1:] != (3,):
        raise DomainError("q must be a 3-vector", op="born.transition_kernel")
    amp = _form_factors(target, q)
    out = amp.real**2 + amp.imag**2
    return float(out) if out.ndim == 0 else out


def averaged_transition_kernel(charges, q, box, n_samples, seed):
    """Kernel for point constituents averaged over uniform random placement in a cube.

    Parameters
    ----------
    charges : array_like
        Constituent couplings.
    q : array_like
        Momentum-transfer 3-vector.
    box : float
        Edge of the cube the positions are drawn from.
    n_samples : int
        Number of random placements.
    seed : int
        Seed for the generator.

    Returns
    -------
    mean, stderr : float
    """
    charges = np.asarray(charges, dtype=float)
    q = np.asarray(q, dtype=float)
    rng = np.random.default_rng(seed)
    total = np.empty(n_samples)
    chunk = 10_000
    for start in range(0, n_samples, chunk):
        m = min(chunk, n_samples - start)
        pos = rng.uniform(-0.5 * box, 0.5 * box, size=(m, charges.size, 3))
        amp = (charges * np.exp(1j * (pos @ q))).sum(-1)
        total[start:start + m] = np.abs(amp) ** 2
    return float(total.mean()), float(total.std(ddof=1) / math.sqrt(n_samples))


def _transverse_basis(n):
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def momentum_transfer_vectors(kin, theta, n_phi=64):
    """q = p_r - p_r' for final directions at polar angle theta, on a uniform azimuth grid.

    Returns an array of shape ``theta.shape + (n_phi, 3)``.
    """
    p = kin.p_r_magnitude
    if p == 0:
        raise DomainError("relative momentum is zero", op="born.momentum_transfer_vectors")
    n = kin.p_r / p
    e1, e2 = _transverse_basis(n)
    theta = np.asarray(theta, dtype=float)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    st = np.sin(theta)[..., None, None]
    ct = np.cos(theta)[..., None, None]
    transverse = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
    return p * (n - (ct * n + st * transverse))


def azimuthal_kernel(target, kin, theta, n_phi=64):
    """Transition kernel averaged over the azimuth of the outgoing direction."""
    q = momentum_transfer_vectors(kin, theta, n_phi)
    amp = _form_factors(target, q)
    out = (amp.real**2 + amp.imag**2).mean(-1)
    return float(out) if out.ndim == 0 else out


def transition_probability_density(pot, kin, target, theta, n_phi=64):
    """dsigma/dcos(theta) for a composite target, G^2 replaced by the azimuth-averaged kernel."""
    theta = _check_theta(theta, "born.transition_probability_density")
    point = coherent_differential_cross_section(pot, kin, 1.0, theta)
    return point * azimuthal_kernel(target, kin, theta, n_phi)


def cross_section_table(pot, kin, theta, G=None, target=None, n_phi=64, extra=None):
    """Tabulate the differential cross section on a theta grid.

    Exactly one of ``G`` (coherent point target) or ``target`` must be given.
    The ``kernel_ratio`` column is kernel / G^2 (ones for a point target).
    """
    if (G is None) == (target is None):
        raise DomainError("give exactly one of G or target", op="born.cross_section_table")
    theta = _check_theta(theta, "born.cross_section_table")
    meta = {"m_r": kin.m_r, "E_r": kin.E_r, "potential": pot.describe()}
    if target is None:
        values = coherent_differential_cross_section(pot, kin, G, theta)
        ratio = np.ones_like(np.atleast_1d(values))
        meta["G"] = G
    else:
        G = target.total_charge
        kernel = np.atleast_1d(azimuthal_kernel(target, kin, theta, n_phi))
        values = np.atleast_1d(coherent_differential_cross_section(pot, kin, 1.0, theta)) * kernel
        ratio = kernel / (G * G) if G != 0 else np.full_like(kernel, np.nan)
        meta["G"] = G
        meta["target"] = target.describe()
        meta["target_size"] = target.size
    if extra:
        meta.update(extra)
    return CrossSectionTable(np.atleast_1d(theta), np.atleast_1d(values), meta, ratio)
