"""Radial reduction: the integral over H^n of a function of |y|_h equals
omega_Q * int_0^inf f(r) r^(Q-1) dr, with omega_Q = Q * (unit-ball volume).
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

from ._quad import adaptive_quad
from .errors import DivergentIntegral, InvalidArgument


@dataclass(frozen=True)
class RadialProfile:
    """``evaluator(r)`` for r > 0. ``tail_exponent_hint`` p means
    evaluator(r) ~ r^-p as r -> inf; ``None`` means no usable hint (for
    instance compact support)."""

    evaluator: Callable[[float], float]
    tail_exponent_hint: Optional[float] = None
    breakpoints: tuple = ()


def radial_line_integral(Q, profile, epsabs=1e-10, epsrel=1e-10, limit=200):
    """int_0^inf profile(r) r^(Q-1) dr, split at r = 1.

    The tail (1, inf) is mapped to (0, 1) by u = 1/r. If the hinted decay
    leaves an integrable singularity u^a (-1 < a < 0) at u = 0 it is moved
    into the quadrature weight.
    """
    f = profile.evaluator
    inner_pts = [p for p in profile.breakpoints if 0 < p < 1]
    tail_pts = [1.0 / p for p in profile.breakpoints if p > 1]
    a = None
    if profile.tail_exponent_hint is not None:
        a = profile.tail_exponent_hint - Q - 1.0
        if a <= -1.0:
            raise DivergentIntegral(
                f"tail r^(Q-1-p) with p = {profile.tail_exponent_hint} is not integrable for Q = {Q}")
    head, e1 = adaptive_quad(lambda r: f(r) * r ** (Q - 1), 0.0, 1.0,
                             epsabs, epsrel, limit, points=inner_pts)

    def tail(u):
        if u == 0.0:
            return 0.0
        return f(1.0 / u) * u ** (-Q - 1)

    if a is not None and a < 0.0:
        tail_val, e2 = adaptive_quad(lambda u: tail(u) * u ** (-a) if u > 0 else 0.0,
                                     0.0, 1.0, epsabs, epsrel, limit,
                                     weight="alg", wvar=(a, 0.0))
    else:
        tail_val, e2 = adaptive_quad(tail, 0.0, 1.0, epsabs, epsrel, limit, points=tail_pts)
    return head + tail_val, e1 + e2


def radial_integral(dim, profile, method="adaptive-1d", epsabs=1e-10, epsrel=1e-10, limit=200):
    """omega_Q * int_0^inf profile(r) r^(Q-1) dr using the measured omega_Q
    (or whichever source ``dim`` was built with)."""
    if method != "adaptive-1d":
        raise InvalidArgument(f"unknown radial integration method {method!r}")
    value, err = radial_line_integral(dim.Q, profile, epsabs, epsrel, limit)
    return dim.omega_sphere * value


def radial_integral_with_error(dim, profile, epsabs=1e-10, epsrel=1e-10, limit=200):
    value, err = radial_line_integral(dim.Q, profile, epsabs, epsrel, limit)
    return dim.omega_sphere * value, dim.omega_sphere * err


def is_integrable_power(Q, p):
    return math.isfinite(p) and p > Q
