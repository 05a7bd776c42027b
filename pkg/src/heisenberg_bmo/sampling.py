"""Sampling on H^n with respect to Haar (= Lebesgue) measure."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalError, InvalidArgument
from .group import _dilate, _gauge, _mul, as_point
from .mc import DEFAULT_CHUNK, Estimate, mc_moments, rng_of

MAX_REJECTION_ROUNDS = 10 ** 6


def propose_unit_ball(rng, dim, size):
    """Uniform draws from the unit gauge ball by rejection from [-1, 1]^(2n+1).

    Returns ``(points, n_proposed)``.
    """
    out = np.empty((size, dim.size))
    filled = proposed = rounds = 0
    while filled < size:
        rounds += 1
        if rounds > MAX_REJECTION_ROUNDS:
            raise InternalError("rejection sampler exceeded its iteration cap")
        batch = max(64, int(1.25 * (size - filled) * 2 ** dim.size / dim.omega_cap))
        z = rng.uniform(-1.0, 1.0, size=(batch, dim.size))
        hits = np.flatnonzero(_gauge(z) < 1.0)
        take = min(len(hits), size - filled)
        out[filled:filled + take] = z[hits[:take]]
        # proposals after the last one used are not counted
        proposed += batch if take == len(hits) else int(hits[take - 1]) + 1
        filled += take
    return out, proposed


def sample_ball_uniform(dim, center, r, stream, size=None):
    """Uniform points of B(center, r): unit-ball draw, dilation by r, then
    left translation by ``center``."""
    if not (math.isfinite(r) and r > 0):
        raise InvalidArgument(f"radius must be positive and finite, got {r!r}")
    c = as_point(dim, center)
    z, _ = propose_unit_ball(rng_of(stream), dim, 1 if size is None else size)
    y = _mul(dim.n, np.broadcast_to(c, z.shape), _dilate(r, z))
    return y[0] if size is None else y


def ball_acceptance_rate(dim, n_proposals, stream, threads=1):
    """Fraction of box proposals accepted by the unit-ball test."""
    def draw(rng, size):
        z = rng.uniform(-1.0, 1.0, size=(size, dim.size))
        return (_gauge(z) < 1.0).astype(float)

    return Estimate.from_moments(mc_moments(draw, n_proposals, stream, threads=threads))


def mc_ball_volume(dim, r, n_samples, stream, threads=1):
    """Hit-or-miss volume of B(0, r) inside [-r, r]^2n x [-r^2, r^2]."""
    box = 2.0 ** dim.size * r ** dim.Q
    scale = np.ones(dim.size) * r
    scale[-1] = r * r

    def draw(rng, size):
        y = rng.uniform(-1.0, 1.0, size=(size, dim.size)) * scale
        return (_gauge(y) < r).astype(float)

    mom = mc_moments(draw, n_samples, stream, threads=threads).scaled(box)
    return Estimate.from_moments(mom)


def gauge_polar(dim, y):
    """Split y = dilate(radius, direction) with |direction|_h = 1."""
    y = as_point(dim, y)
    rho = _gauge(y)
    if np.any(rho == 0):
        raise InvalidArgument("the identity has no gauge-polar direction")
    return rho, _dilate(1.0 / rho, y)


@dataclass(frozen=True)
class PowerLaw:
    """Density proportional to r^(Q-1-kappa) on [0, radius]; kappa < Q."""

    radius: float
    kappa: float = 0.0

    def check(self, dim):
        if not (self.radius > 0 and math.isfinite(self.radius)) or self.kappa >= dim.Q:
            raise InvalidArgument(f"invalid power-law density {self}")

    def sample(self, rng, dim, size):
        e = dim.Q - self.kappa
        return self.radius * rng.random(size) ** (1.0 / e)

    def weight(self, dim, r):
        e = dim.Q - self.kappa
        return dim.omega_sphere * self.radius ** e * r ** self.kappa / e


@dataclass(frozen=True)
class Pareto:
    """Density kappa r^(-1-kappa) on [1, inf); kappa > 0."""

    kappa: float

    def check(self, dim):
        if not self.kappa > 0:
            raise InvalidArgument(f"invalid Pareto density {self}")

    def sample(self, rng, dim, size):
        return (1.0 - rng.random(size)) ** (-1.0 / self.kappa)

    def weight(self, dim, r):
        return dim.omega_sphere * r ** (dim.Q + self.kappa) / self.kappa


@dataclass(frozen=True)
class BrokenPower:
    """Density proportional to r^(Q-1) min(1, r^-beta) on (0, inf); beta > Q.

    Matches the per-factor decay of the Hardy and Hilbert kernels, which
    keeps importance weights times kernel bounded.
    """

    beta: float

    def check(self, dim):
        if not self.beta > dim.Q:
            raise InvalidArgument(f"broken power-law needs beta > Q = {dim.Q}, got {self.beta}")

    def _norm(self, dim):
        return 1.0 / dim.Q + 1.0 / (self.beta - dim.Q)

    def sample(self, rng, dim, size):
        Q, b = dim.Q, self.beta
        Z = self._norm(dim)
        u = rng.random(size)
        inner = (u * Z * Q) ** (1.0 / Q)
        with np.errstate(divide="ignore"):
            outer = ((b - Q) * Z * (1.0 - u)) ** (-1.0 / (b - Q))
        return np.where(u < 1.0 / (Q * Z), inner, outer)

    def weight(self, dim, r):
        return dim.omega_sphere * self._norm(dim) * np.maximum(1.0, r ** self.beta)


def sample_directions(rng, dim, size):
    z, _ = propose_unit_ball(rng, dim, size)
    return _dilate(1.0 / _gauge(z), z)


def sample_radial_importance(dim, density, stream, size=None):
    """Points delta_S(Theta) with S ~ ``density`` and Theta the gauge-polar
    direction of a uniform ball draw, plus weights w with
    E[f(point) w] = integral of f over the density's support."""
    density.check(dim)
    rng = rng_of(stream)
    k = 1 if size is None else size
    r = density.sample(rng, dim, k)
    pts = _dilate(r, sample_directions(rng, dim, k))
    w = density.weight(dim, r)
    return (pts[0], w[0]) if size is None else (pts, w)


def importance_integral(dim, f, density, n_samples, stream, chunk_size=DEFAULT_CHUNK, threads=1):
    """Monte-Carlo integral of the vectorised ``f`` over H^n."""
    density.check(dim)

    def draw(rng, size):
        pts, w = sample_radial_importance(dim, density, rng, size)
        return f(pts) * w

    return Estimate.from_moments(mc_moments(draw, n_samples, stream, chunk_size, threads))
