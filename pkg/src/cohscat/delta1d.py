"""Stationary scattering of a particle on an array of 1D Dirac-delta potentials.

A site at ``x_j`` with strength ``alpha_j`` imposes continuity of the wave
function and a jump in its derivative,

    psi'(x_j+) - psi'(x_j-) = 2 m alpha_j / hbar^2 * psi(x_j).

Two independent solvers are provided: a product of 2x2 transfer matrices and
a direct solve of the full boundary-condition linear system. The
two-delta closed form and single-delta reflectivity are exposed for
comparison. Units are internal (hbar = 1).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularSystemError


@dataclass(frozen=True)
class DeltaArray:
    """Ordered delta sites and the particle mass."""

    positions: tuple
    strengths: tuple
    mass: float = 1.0

    def __post_init__(self):
        positions = tuple(float(x) for x in self.positions)
        strengths = tuple(float(a) for a in self.strengths)
        if len(positions) != len(strengths):
            raise DomainError("positions and strengths differ in length", op="delta1d.DeltaArray")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise DomainError("positions must be strictly increasing", op="delta1d.DeltaArray")
        if not np.all(np.isfinite(positions)) or not np.all(np.isfinite(strengths)):
            raise DomainError("positions and strengths must be finite", op="delta1d.DeltaArray")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise DomainError(f"mass must be positive, got {self.mass!r}", op="delta1d.DeltaArray")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "strengths", strengths)
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def from_sites(cls, sites, mass=1.0):
        """Build from ``[(x, alpha), ...]``; sites are sorted by position."""
        sites = sorted((float(x), float(a)) for x, a in sites)
        return cls(tuple(x for x, _ in sites), tuple(a for _, a in sites), mass)

    @classmethod
    def two_delta(cls, beta, ka, k=1.0, mass=1.0):
        """Two equal deltas at 0 and a, parametrized by beta = k/(m alpha) and ka."""
        if beta == 0:
            raise DomainError("beta = 0 means infinite coupling", op="delta1d.DeltaArray.two_delta")
        alpha = k / (mass * beta)
        a = ka / k
        if a == 0:
            return cls((0.0,), (2.0 * alpha,), mass)
        return cls((0.0, a), (alpha, alpha), mass)

    @classmethod
    def uniform(cls, n, spacing, strength, mass=1.0):
        """``n`` equal sites with uniform spacing starting at the origin.

        Zero spacing merges the sites into one of strength ``n * strength``.
        """
        if n < 1:
            raise DomainError("need at least one site", op="delta1d.DeltaArray.uniform")
        if spacing == 0:
            return cls((0.0,), (n * strength,), mass)
        return cls(tuple(j * spacing for j in range(n)), (strength,) * n, mass)

    def __len__(self):
        return len(self.positions)

    def reversed(self):
        """Mirror image x -> -x (incidence from the right)."""
        return DeltaArray(tuple(-x for x in reversed(self.positions)),
                          tuple(reversed(self.strengths)), self.mass)

    def shifted(self, dx):
        return DeltaArray(tuple(x + dx for x in self.positions), self.strengths, self.mass)

    def beta(self, k, site=0):
        """Dimensionless velocity/coupling ratio k hbar^2 / (m alpha) for one site."""
        return k / (self.mass * self.strengths[site])


@dataclass(frozen=True)
class Amplitudes1D:
    k: np.ndarray
    r: np.ndarray
    t: np.ndarray
    R: np.ndarray = field(init=False)
    T: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "R", np.abs(self.r) ** 2)
        object.__setattr__(self, "T", np.abs(self.t) ** 2)


def _check_k(k, op):
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise DomainError("wave number must be positive and finite", op=op)
    return k


def reflectivity_two_delta_closed_form(beta, ka):
    """Reflectivity of two equal repulsive deltas separated by ``a``.

    Parameters
    ----------
    beta : float or array_like
        k hbar^2 / (m alpha), positive.
    ka : float or array_like
        Wave number times separation, non-negative.
    """
    beta = np.asarray(beta, dtype=float)
    ka = np.asarray(ka, dtype=float)
    if np.any(beta == 0):
        raise DomainError("beta = 0 means infinite coupling",
                          op="delta1d.reflectivity_two_delta_closed_form")
    if np.any(beta < 0) or np.any(ka < 0):
        raise DomainError("closed form requires beta > 0 and ka >= 0",
                          op="delta1d.reflectivity_two_delta_closed_form")
    b2 = beta * beta
    num = 4.0 * (beta * np.cos(ka) + np.sin(ka)) ** 2
    den = 2.0 + 2.0 * b2 + b2 * b2 + 2.0 * (b2 - 1.0) * np.cos(2.0 * ka) + 4.0 * beta * np.sin(2.0 * ka)
    out = num / den
    return float(out) if out.ndim == 0 else out


def reflectivity_single_delta(beta):
    """1 / (1 + beta^2)."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise DomainError("beta must be positive", op="delta1d.reflectivity_single_delta")
    out = 1.0 / (1.0 + beta * beta)
    return float(out) if out.ndim == 0 else out


def transfer_matrix_solve(arr, k):
    """Reflection/transmission amplitudes by composing per-site transfer matrices.

    ``k`` may be a scalar or an array; amplitudes broadcast over it. The
    returned ``r`` and ``t`` are for unit incidence from the left, with plane
    waves referenced to the origin.
    """
    k = _check_k(k, "delta1d.transfer_matrix_solve")
    # extended precision: strong sites make the product entries large and
    # nearly cancelling, and R + T = 1 is only as good as their ratio
    kk = np.atleast_1d(k).astype(np.longdouble)
    m11 = np.ones(kk.shape, dtype=np.clongdouble)
    m12 = np.zeros(kk.shape, dtype=np.clongdouble)
    m21 = np.zeros(kk.shape, dtype=np.clongdouble)
    m22 = np.ones(kk.shape, dtype=np.clongdouble)
    for x, alpha in zip(arr.positions, arr.strengths):
        # (c, d) on the left -> (c, d) on the right of the site
        u = -1j * (np.longdouble(arr.mass) * np.longdouble(alpha) / kk)
        phase = 2 * kk * np.longdouble(x)
        ph = np.cos(phase) + 1j * np.sin(phase)
        s11, s12, s21, s22 = 1 + u, u * np.conj(ph), -u * ph, 1 - u
        m11, m12, m21, m22 = (s11 * m11 + s12 * m21, s11 * m12 + s12 * m22,
                              s21 * m11 + s22 * m21, s21 * m12 + s22 * m22)
    r = (-m21 / m22).astype(complex)
    t = (1 / m22).astype(complex)  # det M = 1
    if k.ndim == 0:
        return Amplitudes1D(k, r[0], t[0])
    return Amplitudes1D(k, r, t)


def boundary_condition_solve(arr, k):
    """Amplitudes from a direct solve of all matching conditions.

    Unknowns are the reflected amplitude d_1, the interior pairs (c_j, d_j)
    and the transmitted amplitude c_{N+1}; incidence is fixed by c_1 = 1 and
    d_{N+1} = 0. Each site contributes one continuity row and one
    derivative-jump row.
    """
    k = float(_check_k(k, "delta1d.boundary_condition_solve"))
    n = len(arr)
    if n == 0:
        return Amplitudes1D(np.asarray(k), np.asarray(0j), np.asarray(1.0 + 0j))

    # region j (0..n) has coefficients (c_j, d_j); column index of each unknown
    def col(region, which):
        if region == 0:
            return 0  # d_0 only
        if region == n:
            return 2 * n - 1  # c_n only
        return 1 + 2 * (region - 1) + which

    A = np.zeros((2 * n, 2 * n), dtype=complex)
    b = np.zeros(2 * n, dtype=complex)

    def add(row, region, which, coeff):
        if region == 0 and which == 0:
            b[row] -= coeff  # c_0 = 1 moves to the right-hand side
        elif region == n and which == 1:
            pass  # d_n = 0
        else:
            A[row, col(region, which)] += coeff

    for j, (x, alpha) in enumerate(zip(arr.positions, arr.strengths)):
        e, einv = np.exp(1j * k * x), np.exp(-1j * k * x)
        kappa = 2.0 * arr.mass * alpha
        cont, jump = 2 * j, 2 * j + 1
        # psi_{j+1}(x) - psi_j(x) = 0
        add(cont, j + 1, 0, e)
        add(cont, j + 1, 1, einv)
        add(cont, j, 0, -e)
        add(cont, j, 1, -einv)
        # psi'_{j+1}(x) - psi'_j(x) - kappa psi_j(x) = 0
        add(jump, j + 1, 0, 1j * k * e)
        add(jump, j + 1, 1, -1j * k * einv)
        add(jump, j, 0, -1j * k * e - kappa * e)
        add(jump, j, 1, 1j * k * einv - kappa * einv)

    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystemError(f"boundary-condition system is singular (cond = {cond:.3g})",
                                  op="delta1d.boundary_condition_solve")
    sol = np.linalg.solve(A, b)
    return Amplitudes1D(np.asarray(k), np.asarray(sol[0]), np.asarray(sol[-1]))


def coherent_gain(arr, k):
    """Reflectivity of the array divided by that of one of its sites alone."""
    if len(arr) == 0:
        raise DomainError("empty array", op="delta1d.coherent_gain")
    if len(set(arr.strengths)) != 1:
        raise DomainError("coherent gain needs equal-strength sites", op="delta1d.coherent_gain")
    single = DeltaArray((0.0,), (arr.strengths[0],), arr.mass)
    r_single = transfer_matrix_solve(single, k).R
    if np.any(r_single == 0):
        raise DomainError("single-site reflectivity vanishes", op="delta1d.coherent_gain")
    out = transfer_matrix_solve(arr, k).R / r_single
    return float(out) if np.ndim(out) == 0 else out
