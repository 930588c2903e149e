"""Inverse-transform sampling of scattering angles.

Sampling is done in u = cos(theta). The Rutherford density is proportional to
1/(1-u)^2, whose antiderivative 1/(1-u) gives the inverse CDF in closed form;
written in theta it reads tan(theta/2) = tan(theta_min/2) / sqrt(F).
Tabulated distributions use a piecewise-linear CDF over u.

Streams: a draw of ``count`` angles may be split over ``streams`` independent
generators spawned from one seed; their outputs are concatenated in stream
order, so results depend on (seed, streams) but not on scheduling.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class AngularSampleSpec:
    theta_min: float
    count: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.theta_min < math.pi:
            raise DomainError(f"theta_min must lie in (0, pi), got {self.theta_min!r}",
                              op="sampler.AngularSampleSpec")
        if int(self.count) != self.count or self.count < 1:
            raise DomainError("count must be a positive integer", op="sampler.AngularSampleSpec")


def rutherford_cdf(theta, theta_min):
    """CDF of the Rutherford angle on [theta_min, pi], increasing in theta."""
    theta = np.clip(np.asarray(theta, dtype=float), theta_min, math.pi)
    # mass at angles >= theta is tan^2(theta_min/2) / tan^2(theta/2)
    ratio = math.tan(0.5 * theta_min) / np.tan(0.5 * theta)
    return 1.0 - ratio * ratio


def _rutherford_inverse(F, theta_min):
    # F uniform on [0, 1) is the mass at angles above theta; this form keeps
    # full precision near pi, where arccos of cos(theta) would not
    with np.errstate(divide="ignore"):
        return 2.0 * np.arctan(math.tan(0.5 * theta_min) / np.sqrt(F))


def _split(count, streams):
    base, extra = divmod(count, streams)
    return [base + (i < extra) for i in range(streams)]


def _run_streams(draw, count, seed, streams, workers):
    if streams < 1:
        raise DomainError("streams must be at least 1", op="sampler")
    seqs = np.random.SeedSequence(seed).spawn(streams)
    sizes = _split(count, streams)
    jobs = [(np.random.default_rng(s), n) for s, n in zip(seqs, sizes)]
    if workers and workers > 1 and streams > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(*job), jobs))
    else:
        parts = [draw(*job) for job in jobs]
    return np.concatenate(parts)


def sample_rutherford(spec, streams=1, workers=None):
    """Draw ``spec.count`` angles from the Rutherford distribution above ``spec.theta_min``."""
    return _run_streams(lambda rng, n: _rutherford_inverse(rng.random(n), spec.theta_min),
                        int(spec.count), spec.seed, streams, workers)


def _table_cdf(table):
    # ascending in u = cos(theta) means descending theta
    u = np.cos(table.theta[::-1])
    f = table.values[::-1]
    mass = 0.5 * (f[1:] + f[:-1]) * np.diff(u)
    if u.size < 2 or not np.isfinite(mass.sum()) or mass.sum() <= 0:
        raise DomainError("table has no probability mass", op="sampler.sample_general")
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    return u, cdf / cdf[-1]


def sample_general(table, count, seed=0, streams=1, workers=None):
    """Draw angles distributed as a tabulated dsigma/dcos(theta).

    The density is integrated by the trapezoid rule over cos(theta) and the
    resulting piecewise-linear CDF is inverted.
    """
    u, cdf = _table_cdf(table)

    def draw(rng, n):
        F = 1.0 - rng.random(n)  # (0, 1]
        i = np.searchsorted(cdf, F, side="left") - 1
        i = np.clip(i, 0, cdf.size - 2)
        frac = (F - cdf[i]) / (cdf[i + 1] - cdf[i])
        return np.arccos(np.clip(u[i] + frac * (u[i + 1] - u[i]), -1.0, 1.0))

    return _run_streams(draw, int(count), seed, streams, workers)


def histogram_cos(angles, theta_min, bins):
    """Counts over ``bins`` uniform bins in cos(theta) on [-1, cos(theta_min)]."""
    edges = np.linspace(-1.0, math.cos(theta_min), bins + 1)
    counts, _ = np.histogram(np.cos(angles), bins=edges)
    return edges, counts
