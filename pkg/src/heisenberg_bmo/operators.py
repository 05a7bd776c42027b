"""Pointwise evaluation of the m-linear Hardy-Littlewood-Polya (HLP),
Hilbert and Hausdorff operators on H^n.

With gauge exponent beta the HLP kernel is 1/max(|x|^b, |y_1|^b, ...)^m and
the Hilbert kernel 1/(|x|^b + sum_j |y_j|^b)^m. Both are multiplied by the
normalisation |x|^((b-Q)m), which makes the joint kernel homogeneous of
degree -Qm. Substituting y_j = delta_{|x|}(z_j) then gives

    H(f)(x) = int prod_j f_j(delta_{|x|} z_j) / max(1, |z_1|^b, ...)^m dz

(and the Hilbert analogue), which is the form evaluated by default. At
beta = Q the normalisation is 1 and both forms are the raw definitions.

The Hausdorff operator is evaluated as

    G(f)(x) = int Phi(y) / prod_j |y_j|^b * prod_j f_j(delta_{1/|y_j|} x) dy.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DivergentIntegral, InvalidArgument
from .functions import FunctionSpec, PhiSpec
from .group import _dilate, _gauge, as_point
from .mc import DEFAULT_CHUNK, Estimate, SeededStream, mc_moments
from .sampling import BrokenPower, PowerLaw, sample_directions

FAMILIES = ("HLP", "Hilbert", "Hausdorff")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    m: int = 1
    beta: float = 8.0
    phi: Optional[PhiSpec] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgument(f"family must be one of {FAMILIES}, got {self.family!r}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgument(f"m must be a positive integer, got {self.m!r}")
        if not self.beta > 0:
            raise InvalidArgument(f"beta must be positive, got {self.beta!r}")
        if (self.phi is not None) != (self.family == "Hausdorff"):
            raise InvalidArgument("phi is required for Hausdorff and only for Hausdorff")


@dataclass(frozen=True)
class QuadratureConfig:
    n_samples: int = 100_000
    truncation_radius: Optional[float] = None
    stream: SeededStream = field(default_factory=SeededStream)
    proposal: object = None
    threads: int = 1
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidArgument("n_samples must be >= 1")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise InvalidArgument("truncation_radius must be positive")


def divergence_reason(family, m, Q, beta):
    tail = Q * m - 1 - beta * m
    return (f"beta ≤ Q = {Q} (beta = {beta:g}; the radial integrand decays like "
            f"r^{tail:g}, and an exponent ≥ -1 is not integrable at infinity)")



def _log_kernel(family, m, beta, log_xg, log_r):
    """log of the raw HLP/Hilbert kernel for gauge log|x| and radii log|y_j|."""
    if family == "HLP":
        return -beta * m * np.maximum(log_xg, np.max(log_r, axis=-1))
    terms = np.concatenate([np.broadcast_to(log_xg, log_r.shape[:-1])[..., None], log_r], axis=-1)
    return -m * np.logaddexp.reduce(beta * terms, axis=-1)


def _log_weight(density, dim, r):
    if isinstance(density, BrokenPower):
        with np.errstate(divide="ignore"):
            return np.log(dim.omega_sphere * density._norm(dim)) + density.beta * np.maximum(0.0, np.log(r))
    if isinstance(density, PowerLaw):
        e = dim.Q - density.kappa
        base = np.log(dim.omega_sphere * density.radius ** e / e)
        if density.kappa == 0:
            return np.full_like(r, base)
        with np.errstate(divide="ignore"):
            return base + density.kappa * np.log(r)
    with np.errstate(divide="ignore", over="ignore"):
        return np.log(density.weight(dim, r))


def default_proposal(spec, dim, cfg):
    if cfg.proposal is not None:
        return cfg.proposal
    if spec.family == "Hausdorff":
        R = cfg.truncation_radius or spec.phi.support_radius
        if R is None:
            raise InvalidArgument("Hausdorff evaluation needs phi.support_radius, a truncation "
                                  "radius or an explicit proposal")
        return PowerLaw(R, spec.beta if spec.beta < dim.Q else 0.0)
    if cfg.truncation_radius is not None:
        return PowerLaw(cfg.truncation_radius)
    return BrokenPower(spec.beta)


def check_convergence(spec, dim, cfg):
    """Raise ``DivergentIntegral`` for configurations with an infinite integral."""
    if spec.family == "Hausdorff":
        ok = spec.phi.finite_for
        if ok is not None and not ok(dim.Q, spec.beta):
            raise DivergentIntegral(f"Phi = {spec.phi.name} with beta = {spec.beta:g} gives an "
                                    f"infinite constant for Q = {dim.Q}")
        return
    if cfg.truncation_radius is None and spec.beta <= dim.Q:
        raise DivergentIntegral(divergence_reason(spec.family, spec.m, dim.Q, spec.beta))


@dataclass
class FactorDraws:
    """m independent importance draws per sample with the combined factor
    (kernel x importance weights) of the change-of-variable form."""

    ys: np.ndarray      # (size, m, 2n+1)
    radii: np.ndarray   # (size, m)
    wk: np.ndarray      # (size,)


def draw_factors(spec, dim, cfg, rng, size, density=None):
    density = density or default_proposal(spec, dim, cfg)
    density.check(dim)
    m = spec.m
    r = density.sample(rng, dim, size * m).reshape(size, m)
    theta = sample_directions(rng, dim, size * m).reshape(size, m, dim.size)
    ys = _dilate(r, theta)
    logw = np.sum(_log_weight(density, dim, r), axis=-1)
    with np.errstate(divide="ignore"):
        log_r = np.log(r)
    if spec.family == "Hausdorff":
        with np.errstate(divide="ignore", invalid="ignore"):
            wk = spec.phi.evaluator(ys) * np.exp(logw - spec.beta * np.sum(log_r, axis=-1))
        wk = np.where(np.isfinite(wk), wk, 0.0)
    else:
        wk = np.exp(logw + _log_kernel(spec.family, m, spec.beta, 0.0, log_r))
    return FactorDraws(ys, r, wk)


def _check_fs(spec, fs):
    fs = tuple(fs)
    if len(fs) != spec.m:
        raise InvalidArgument(f"expected {spec.m} functions, got {len(fs)}")
    return fs


def rule_values(spec, dim, fs, xs, draws):
    """Integrand values, shape (len(xs), size), for points ``xs`` (k, 2n+1)."""
    xs = np.atleast_2d(xs)
    out = np.broadcast_to(draws.wk, (len(xs), len(draws.wk))).copy()
    if spec.family == "Hausdorff":
        for j, f in enumerate(fs):
            s = 1.0 / draws.radii[:, j]
            pts = _dilate(s[None, :], np.broadcast_to(xs[:, None, :], (len(xs), len(s), dim.size)))
            out *= f(pts)
        return out
    g = _gauge(xs)
    for j, f in enumerate(fs):
        pts = _dilate(g[:, None], np.broadcast_to(draws.ys[None, :, j, :],
                                                  (len(xs),) + draws.ys[:, j, :].shape))
        out *= f(pts)
    return out


def kernel_value(spec, dim, x, ys):
    """Raw defining kernel at x and ys (shape (m, 2n+1) or (..., m, 2n+1))."""
    x = as_point(dim, x)
    ys = as_point(dim, ys)
    if ys.ndim < 2 or ys.shape[-2] != spec.m:
        raise InvalidArgument(f"expected {spec.m} points y_j")
    xg = _gauge(x)
    yg = _gauge(ys)
    if spec.family == "Hausdorff":
        if np.any(yg == 0):
            raise InvalidArgument("Hausdorff kernel is singular at y_j = identity")
        args = _dilate(1.0 / yg, np.broadcast_to(x[..., None, :], ys.shape))
        return spec.phi.evaluator(args) / np.prod(yg ** spec.beta, axis=-1)
    if np.any(xg == 0):
        raise InvalidArgument("kernel is singular at x = identity")
    b, m = spec.beta, spec.m
    if spec.family == "HLP":
        return 1.0 / np.maximum(xg ** b, np.max(yg ** b, axis=-1)) ** m
    return 1.0 / (xg ** b + np.sum(yg ** b, axis=-1)) ** m


def normalization(spec, dim, x):
    """|x|^((beta - Q) m), the factor that turns the raw kernel into a
    degree -Qm homogeneous one."""
    return _gauge(as_point(dim, x)) ** ((spec.beta - dim.Q) * spec.m)


def eval_operator(spec, dim, fs, x, cfg, form="dilated"):
    """Monte-Carlo value of the operator at ``x``.

    ``form="dilated"`` integrates the change-of-variable form with per-factor
    radial importance sampling; ``form="direct"`` (HLP/Hilbert only)
    integrates the normalised defining kernel with x in place.
    """
    fs = _check_fs(spec, fs)
    x = as_point(dim, x)
    if x.ndim != 1:
        raise InvalidArgument("x must be a single point")
    if _gauge(x) == 0:
        raise InvalidArgument("operators are defined for x away from the identity")
    check_convergence(spec, dim, cfg)
    truncated = cfg.truncation_radius is not None and spec.family != "Hausdorff"

    if form == "dilated":
        density = default_proposal(spec, dim, cfg)

        def draw(rng, size):
            return rule_values(spec, dim, fs, x[None, :], draw_factors(spec, dim, cfg, rng, size, density))[0]
    elif form == "direct":
        if spec.family == "Hausdorff":
            raise InvalidArgument("direct form is implemented for HLP and Hilbert only")
        draw = _direct_sampler(spec, dim, fs, x, cfg)
    else:
        raise InvalidArgument(f"unknown form {form!r}")
    mom = mc_moments(draw, cfg.n_samples, cfg.stream, cfg.chunk_size, cfg.threads)
    return Estimate.from_moments(mom, truncated)


def _direct_sampler(spec, dim, fs, x, cfg):
    xg = float(_gauge(x))
    m, b = spec.m, spec.beta
    if cfg.truncation_radius is not None:
        density = PowerLaw(cfg.truncation_radius * xg)
    else:
        density = cfg.proposal or BrokenPower(b)
    density.check(dim)
    log_norm = (b - dim.Q) * m * np.log(xg)

    def draw(rng, size):
        r = density.sample(rng, dim, size * m).reshape(size, m)
        theta = sample_directions(rng, dim, size * m).reshape(size, m, dim.size)
        ys = _dilate(r, theta)
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
        logw = np.sum(_log_weight(density, dim, r), axis=-1)
        vals = np.exp(log_norm + logw + _log_kernel(spec.family, m, b, np.log(xg), log_r))
        for j, f in enumerate(fs):
            vals = vals * f(ys[:, j, :])
        return vals

    return draw


def frozen_operator(spec, dim, fs, cfg, x_chunk=None):
    """The operator output as a FunctionSpec, built from one fixed set of
    ``cfg.n_samples`` draws (common random numbers across all x)."""
    fs = _check_fs(spec, fs)
    check_convergence(spec, dim, cfg)
    draws = draw_factors(spec, dim, cfg, cfg.stream.generator(), cfg.n_samples)
    step = x_chunk or max(1, 4_000_000 // cfg.n_samples)

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, dim.size)
        out = np.empty(len(flat))
        for i in range(0, len(flat), step):
            out[i:i + step] = np.mean(rule_values(spec, dim, fs, flat[i:i + step], draws), axis=1)
        return out.reshape(x.shape[:-1])

    name = f"{spec.family}[m={spec.m},beta={spec.beta:g}]({','.join(f.name for f in fs)})"
    homog = "radial" if spec.family != "Hausdorff" else "none"
    if all(f.homogeneity == "dilation-invariant" for f in fs):
        homog = "dilation-invariant"
    return FunctionSpec(name, evaluator, homogeneity=homog)
