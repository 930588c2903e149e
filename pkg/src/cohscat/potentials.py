"""Central potentials and their 3D Fourier transforms.

The transform convention is

    V~(q) = int d^3x exp(i q.x) V(|x|) = 4 pi int_0^inf r^2 V(r) sin(q r)/(q r) dr

in internal units (hbar = 1). Each kind has a closed form; :func:`fourier_numeric`
evaluates the radial integral directly and serves as the independent check.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError, ForwardDivergenceError, QuadratureError

FOUR_PI = 4.0 * math.pi


def _magnitude(q):
    # a trailing axis of length 3 holds vector components
    q = np.asarray(q, dtype=float)
    if q.ndim >= 1 and q.shape[-1] == 3:
        return np.linalg.norm(q, axis=-1)
    return q


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class Potential:
    """Base class for radial potentials.

    Subclasses define ``value`` (V at radius r), ``r_times_value`` (r V(r),
    finite at the origin for 1/r-type potentials), ``fourier`` and a
    characteristic ``length`` used to subdivide quadrature panels.
    """

    kind = "potential"
    forward_divergent = False
    length = 1.0

    def r_times_value(self, r):
        return r * self.value(r)

    def fourier(self, q):
        return fourier_numeric(self, q)

    def support(self):
        return 0.0, math.inf

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Coulomb(Potential):
    """V(r) = g / r."""

    g: float = 1.0
    kind = "coulomb"
    forward_divergent = True

    def value(self, r):
        return self.g / np.asarray(r, dtype=float)

    def r_times_value(self, r):
        return self.g * np.ones_like(np.asarray(r, dtype=float))

    def fourier(self, q):
        return fourier_coulomb(q, self.g)

    def describe(self):
        return {"kind": self.kind, "g": self.g}


@dataclass(frozen=True)
class Yukawa(Potential):
    """V(r) = g exp(-mu r) / r; ``mu`` is the inverse screening length."""

    g: float = 1.0
    mu: float = 1.0
    kind = "yukawa"

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu!r}", op="potentials.Yukawa")

    @property
    def screening_length(self):
        return 1.0 / self.mu

    @property
    def length(self):
        return 1.0 / self.mu

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.g * np.exp(-self.mu * r) / r

    def r_times_value(self, r):
        return self.g * np.exp(-self.mu * np.asarray(r, dtype=float))

    def fourier(self, q):
        q = _magnitude(q)
        return _scalar_or_array(FOUR_PI * self.g / (q * q + self.mu * self.mu))

    def describe(self):
        return {"kind": self.kind, "g": self.g, "mu": self.mu}


@dataclass(frozen=True)
class Gaussian(Potential):
    """V(r) = V0 exp(-r^2 / (2 w^2))."""

    V0: float = 1.0
    w: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.w > 0:
            raise DomainError(f"width must be positive, got {self.w!r}", op="potentials.Gaussian")

    @property
    def length(self):
        return self.w

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.V0 * np.exp(-0.5 * (r / self.w) ** 2)

    def fourier(self, q):
        q = _magnitude(q)
        return _scalar_or_array(
            self.V0 * (2.0 * math.pi) ** 1.5 * self.w**3 * np.exp(-0.5 * (q * self.w) ** 2))

    def describe(self):
        return {"kind": self.kind, "V0": self.V0, "w": self.w}


class Tabulated(Potential):
    """Cubic-spline interpolation of radial samples.

    The potential is taken to vanish outside ``[r[0], r[-1]]`` when
    transformed; evaluating it there is an error.
    """

    kind = "tabulated"

    def __init__(self, r, V):
        r = np.asarray(r, dtype=float)
        V = np.asarray(V, dtype=float)
        if r.ndim != 1 or r.shape != V.shape or r.size < 4:
            raise DomainError("need at least four matching radial samples", op="potentials.Tabulated")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise DomainError("radii must be non-negative and strictly increasing",
                              op="potentials.Tabulated")
        self.r = r
        self.V = V
        self._spline = CubicSpline(r, V, extrapolate=False)
        self.length = (r[-1] - r[0]) / 8.0

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r[0]) or np.any(r > self.r[-1]):
            raise DomainError(f"radius outside tabulated range [{self.r[0]}, {self.r[-1]}]",
                              op="potentials.Tabulated.value")
        return self._spline(r)

    def support(self):
        return float(self.r[0]), float(self.r[-1])

    def describe(self):
        return {"kind": self.kind, "r": self.r.tolist(), "V": self.V.tolist()}


def fourier_coulomb(q, g=1.0):
    """Transform of g/r: 4 pi g / q^2. Diverges at q = 0."""
    q = _magnitude(q)
    if np.any(q <= 0):
        raise ForwardDivergenceError("Coulomb transform diverges at zero momentum transfer",
                                     op="potentials.fourier_coulomb")
    return _scalar_or_array(FOUR_PI * g / (q * q))


def _panel(f, a, b, epsabs, epsrel):
    val, err, info = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200,
                                    full_output=1)[:3]
    return val, err


_WINDOW = 1000


def _fourier_numeric_scalar(pot, q, rtol, max_panels):
    lo, hi = pot.support()
    scale = max(pot.length, 1e-300)
    if q > 0:
        def f(r):
            return FOUR_PI * pot.r_times_value(r) * math.sin(q * r) / q
        half_period = math.pi / q
    else:
        def f(r):
            return FOUR_PI * r * pot.r_times_value(r)
        half_period = math.inf

    # panel edges: zeros of sin(q r), further split so no panel exceeds ~scale
    step = min(half_period, scale)
    total = 0.0
    abs_total = 0.0
    quiet = 0
    window = prev_window = 0.0
    a = lo
    n = 0
    while a < hi:
        if math.isfinite(half_period):
            next_zero = (math.floor(a / half_period + 1e-12) + 1) * half_period
        else:
            next_zero = math.inf
        b = min(a + step, next_zero, hi)
        if b <= a:
            b = min(a + step, hi)
        val, _ = _panel(f, a, b, 0.0, 1e-12)
        total += val
        abs_total += abs(val)
        n += 1
        if not math.isfinite(total):
            raise QuadratureError("integrand is not finite", op="potentials.fourier_numeric")
        # converged once contributions stay negligible for a while past the scale
        if abs(val) <= 1e-3 * rtol * max(abs(total), 1e-300) and b > lo + 4.0 * scale:
            quiet += 1
            if quiet >= 8:
                break
        else:
            quiet = 0
        window += abs(val)
        if n % _WINDOW == 0:
            # oscillating terms that do not shrink: the integral has no limit
            if prev_window > 0 and window > 0.5 * prev_window and b > lo + 4.0 * scale:
                raise QuadratureError(
                    f"radial Fourier integral does not converge (q = {q})",
                    op="potentials.fourier_numeric")
            prev_window, window = window, 0.0
        if n >= max_panels:
            raise QuadratureError(
                f"radial Fourier integral did not converge after {n} panels (q = {q})",
                op="potentials.fourier_numeric")
        a = b
    if abs_total > 0 and abs(total) < 1e-14 * abs_total:
        raise QuadratureError("result lost to cancellation", op="potentials.fourier_numeric")
    return total


def fourier_numeric(pot, q, rtol=1e-8, max_panels=200_000):
    """Radial Fourier transform by panel-wise adaptive quadrature.

    Panels are split at the zeros of sin(q r) and at multiples of the
    potential's characteristic length; summation stops once several
    successive panels contribute below ``rtol`` relative to the running
    total. A non-convergent integral (bare Coulomb, for instance) raises
    :class:`QuadratureError`.
    """
    q = _magnitude(q)
    if np.any(q < 0):
        raise DomainError("q must be non-negative", op="potentials.fourier_numeric")
    if np.ndim(q) == 0:
        return _fourier_numeric_scalar(pot, float(q), rtol, max_panels)
    return np.array([_fourier_numeric_scalar(pot, float(x), rtol, max_panels) for x in q.ravel()]
                    ).reshape(q.shape)


def mean_potential(pot, radius):
    """Volume average of |V| over a ball of the given radius."""
    if not radius > 0:
        raise DomainError("radius must be positive", op="potentials.mean_potential")
    lo, hi = pot.support()
    top = min(radius, hi)
    if top <= lo:
        return 0.0
    val, _ = integrate.quad(lambda r: r * abs(pot.r_times_value(r)), lo, top, limit=200)
    return 3.0 * val / radius**3


_KINDS = {"coulomb": Coulomb, "yukawa": Yukawa, "gaussian": Gaussian}


def potential_from_dict(spec, units=None):
    """Build a potential from a config mapping such as ``{"kind": "yukawa", "g": 1, "mu": 2}``.

    With ``units`` (a :class:`~cohscat.units.UnitSystem`) and ``"units": "si"``
    in the mapping, parameters are taken in SI and converted to internal units.
    """
    spec = dict(spec)
    kind = str(spec.pop("kind", "")).lower()
    unit_tag = spec.pop("units", "internal")
    if unit_tag not in ("internal", "si"):
        raise ConfigError(f"unknown units {unit_tag!r}", op="potentials.potential_from_dict")
    if unit_tag == "si" and units is None:
        raise ConfigError("SI parameters need a unit system", op="potentials.potential_from_dict")
    conv = {"g": "coupling", "mu": "wavenumber", "V0": "energy", "w": "length",
            "r": "length", "V": "energy"}

    def get(name):
        v = spec[name]
        if unit_tag == "si":
            v = units.to_internal(np.asarray(v, dtype=float), conv[name])
        return v

    try:
        if kind == "tabulated":
            return Tabulated(get("r"), get("V"))
        cls = _KINDS[kind]
    except KeyError as exc:
        raise ConfigError(f"bad potential spec: missing or unknown {exc}",
                          op="potentials.potential_from_dict") from None
    fields = list(cls.__dataclass_fields__)
    missing = [k for k in fields if k not in spec]
    if missing:
        raise ConfigError(f"missing parameters for {kind}: {missing}",
                          op="potentials.potential_from_dict")
    unknown = set(spec) - set(fields)
    if unknown:
        raise ConfigError(f"unknown parameters for {kind}: {sorted(unknown)}",
                          op="potentials.potential_from_dict")
    return cls(**{k: float(get(k)) for k in fields})
