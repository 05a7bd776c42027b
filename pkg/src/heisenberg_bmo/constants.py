"""Sharp-bound constants of the HLP (A), Hilbert (B) and Hausdorff (F)
operators, with gauge exponent beta in place of a fixed power.

    A = int_{H^{nm}} dy / max(1, |y_1|^b, ..., |y_m|^b)^m
    B = int_{H^{nm}} dy / (1 + |y_1|^b + ... + |y_m|^b)^m
    F = int_{H^{nm}} Phi(y) / prod_j |y_j|^b dy

Closed forms are cross-checked by nested radial quadrature and by Monte
Carlo, which share no code with them. Divergence of A and B is decided by comparing
beta with Q before any numerics run.
"""
import math
from dataclasses import dataclass
from typing import Optional

from ._quad import adaptive_quad
from .errors import DivergentIntegral, InvalidArgument
from .functions import PhiSpec
from .group import GroupDimension
from .mc import mc_moments
from .operators import KernelSpec, check_convergence, divergence_reason, draw_factors
from .sampling import BrokenPower, PowerLaw
from .special import gamma

CONSTANT_FAMILIES = {"A": "HLP", "B": "Hilbert", "F": "Hausdorff"}
METHODS = ("closed-form", "radial-quadrature", "monte-carlo")


@dataclass(frozen=True)
class ConstantQuery:
    family: str
    m: int
    n: int
    beta: float
    phi: Optional[PhiSpec] = None
    omega_source: str = "measured"

    def __post_init__(self):
        if self.family not in CONSTANT_FAMILIES:
            raise InvalidArgument(f"family must be one of A, B, F; got {self.family!r}")
        # reuse KernelSpec validation
        self.kernel()

    def kernel(self):
        return KernelSpec(CONSTANT_FAMILIES[self.family], self.m, self.beta, self.phi)

    def dim(self):
        return GroupDimension(self.n, self.omega_source)


@dataclass(frozen=True)
class ConstantResult:
    status: str                      # "finite" or "divergent"
    method: str
    value: Optional[float] = None
    error_bound: Optional[float] = None
    reason: str = ""
    n_samples: Optional[int] = None
    truncated: bool = False

    @property
    def finite(self):
        return self.status == "finite"

    def as_dict(self):
        return {
            "status": self.status, "method": self.method, "value": self.value,
            "error_bound": self.error_bound, "reason": self.reason,
            "n_samples": self.n_samples, "truncated": self.truncated,
        }


def _divergent(method, reason, **kw):
    return ConstantResult("divergent", method, reason=reason, **kw)


def convergence_threshold(family, m, n):
    """A and B are finite iff beta exceeds the returned value, Q = 2n + 2.

    The radial integrand behaves like r^(Qm - 1 - beta m) at infinity, which
    is integrable iff beta > Q whatever m is.
    """
    if family not in ("A", "B"):
        raise InvalidArgument("threshold is defined for families A and B")
    return 2 * n + 2


def literal_exponent_condition(family, m, n):
    """The constant with the gauge exponent equal to n (never finite, n < Q)."""
    Q = 2 * n + 2
    return _divergent("closed-form", divergence_reason(CONSTANT_FAMILIES[family], m, Q, float(n)))


def closed_form_A(m, n, beta, omega_source="measured"):
    """Omega^m * beta / (beta - Q); integrates over the level sets of
    max_j |y_j|_h, whose sublevel volume is (Omega r^Q)^m."""
    dim = GroupDimension(n, omega_source)
    if beta <= dim.Q:
        return _divergent("closed-form", divergence_reason("HLP", m, dim.Q, beta))
    value = dim.omega_cap ** m * beta / (beta - dim.Q)
    return ConstantResult("finite", "closed-form", value, 0.0)


def closed_form_B(m, n, beta, omega_source="measured"):
    """(omega/beta)^m G(Q/beta)^m G(m(1 - Q/beta)) / G(m): substitute
    u_j = r_j^beta per factor and apply the Dirichlet integral."""
    dim = GroupDimension(n, omega_source)
    if beta <= dim.Q:
        return _divergent("closed-form", divergence_reason("Hilbert", m, dim.Q, beta))
    s = dim.Q / beta
    value = (dim.omega_sphere / beta) ** m * gamma(s) ** m * gamma(m * (1.0 - s)) / gamma(m)
    return ConstantResult("finite", "closed-form", value, 0.0)


def closed_form(query):
    if query.family == "A":
        return closed_form_A(query.m, query.n, query.beta, query.omega_source)
    if query.family == "B":
        return closed_form_B(query.m, query.n, query.beta, query.omega_source)
    raise InvalidArgument("no generic closed form for family F")


def _nested(Q, m, beta, family, epsrel):
    """Nested radial quadrature over (0, inf)^m for A or B.

    Each level carries a scalar state s: max(1, r_1, ..., r_k) for A and
    1 + sum r_j^beta for B. Every level is integrated in the rescaled
    variable t = r / c with c = s (A) or s^(1/beta) (B), so the new state is
    s max(1, t) or s (1 + t^beta) and the integrand has the same shape at
    every depth; the kink of A sits at t = 1. (0, 1] and (1, inf) are
    integrated separately, the latter after u = 1/t. Absolute tolerances
    follow the magnitude c^Q of the level.
    """
    errs = []

    def final(state):
        return state ** (-beta * m) if family == "A" else state ** (-m)

    def length(state):
        return state if family == "A" else state ** (1.0 / beta)

    def grow(state, t):
        return state * max(1.0, t) if family == "A" else state * (1.0 + t ** beta)

    def level(k, state):
        if k == m:
            return final(state)
        c = length(state)
        cq = c ** Q
        mag = cq * (final(state) if k == m - 1 else level_scale(k + 1, state))
        tol = dict(epsabs=epsrel * mag, epsrel=epsrel, limit=200)

        def head(t):
            return t ** (Q - 1) * level(k + 1, grow(state, t))

        def tail(u):
            if u == 0.0:
                return 0.0
            t = 1.0 / u
            return t ** (Q + 1) * level(k + 1, grow(state, t))

        v1, e1 = adaptive_quad(head, 0.0, 1.0, **tol)
        v2, e2 = adaptive_quad(tail, 0.0, 1.0, **tol)
        if k == 0:
            errs.append(cq * (e1 + e2))
        return cq * (v1 + v2)

    def level_scale(k, state):
        # magnitude of level k at this state, up to an O(1) factor
        if family == "A":
            return state ** (Q * (m - k) - beta * m)
        return state ** ((m - k) * Q / beta - m)

    return level(0, 1.0), errs[0]


def quad_constant(query, tolerance=1e-10):
    """Deterministic nested radial quadrature (m <= 3)."""
    if query.m > 3:
        raise InvalidArgument("radial quadrature supports m <= 3")
    dim = query.dim()
    method = "radial-quadrature"
    if query.family == "F":
        return _quad_F(query, dim, tolerance)
    if query.beta <= dim.Q:
        return _divergent(method, divergence_reason(CONSTANT_FAMILIES[query.family], query.m, dim.Q, query.beta))
    value, err = _nested(dim.Q, query.m, query.beta, query.family, tolerance)
    scale = dim.omega_sphere ** query.m
    # the reported error covers the outer level only; inner levels each
    # contribute up to their requested relative tolerance
    bound = scale * err + query.m * tolerance * scale * abs(value)
    return ConstantResult("finite", method, scale * value, bound)


def _quad_F(query, dim, tolerance):
    phi = query.phi
    method = "radial-quadrature"
    if phi.radial_factor is None:
        raise InvalidArgument("radial quadrature for F needs a product-radial Phi")
    if phi.finite_for is not None and not phi.finite_for(dim.Q, query.beta):
        return _divergent(method, f"Phi = {phi.name} with beta = {query.beta:g} is not integrable for Q = {dim.Q}")
    R = phi.support_radius
    if R is None:
        raise InvalidArgument("radial quadrature for F needs a bounded support")
    g = phi.radial_factor
    # int_0^R g(r) r^(Q-1-beta) dr with the power moved into the weight
    a = dim.Q - 1 - query.beta
    v, e = adaptive_quad(g, 0.0, R, epsabs=0.0, epsrel=tolerance, weight="alg", wvar=(a, 0.0))
    per = dim.omega_sphere * v
    value = per ** query.m
    err = query.m * abs(per) ** (query.m - 1) * dim.omega_sphere * e
    return ConstantResult("finite", method, value, err)


def mc_constant(query, cfg):
    """Importance-sampled Monte Carlo estimate; error_bound is one stderr.

    Families A and B use the per-factor density r^(Q-1) min(1, r^-beta),
    under which the weighted integrand is bounded. With a truncation radius
    each |y_j|_h is restricted to [0, R] and the result is flagged.
    """
    dim = query.dim()
    spec = query.kernel()
    method = "monte-carlo"
    try:
        check_convergence(spec, dim, cfg)
    except DivergentIntegral as exc:
        return _divergent(method, exc.reason)
    truncated = cfg.truncation_radius is not None and query.family != "F"
    if query.family == "F":
        R = cfg.truncation_radius or query.phi.support_radius
        if R is None and cfg.proposal is None:
            raise InvalidArgument("family F needs a bounded Phi support or a truncation radius")
        density = cfg.proposal or PowerLaw(R, query.beta if query.beta < dim.Q else 0.0)
    elif truncated:
        density = cfg.proposal or PowerLaw(cfg.truncation_radius)
    else:
        density = cfg.proposal or BrokenPower(query.beta)

    def draw(rng, size):
        return draw_factors(spec, dim, cfg, rng, size, density).wk

    mom = mc_moments(draw, cfg.n_samples, cfg.stream, cfg.chunk_size, cfg.threads)
    return ConstantResult("finite", method, mom.mean, mom.stderr, n_samples=mom.n, truncated=truncated)


def all_methods(query, cfg, tolerance=1e-10):
    """Closed form (A, B), quadrature (m <= 3) and Monte Carlo for ``query``."""
    out = []
    if query.family in ("A", "B"):
        out.append(closed_form(query))
    if query.m <= 3 and (query.family != "F" or query.phi.radial_factor is not None):
        out.append(quad_constant(query, tolerance))
    out.append(mc_constant(query, cfg))
    return out


def agree(a, b, nsigma=3.0, rel_floor=1e-12):
    """Whether two finite results agree within their error bounds.

    Monte-Carlo bounds (one stderr) are widened to ``nsigma`` stderr; the
    deterministic bounds are used as reported. ``rel_floor`` absorbs
    floating-point rounding when every bound is zero.
    """
    if not (a.finite and b.finite):
        return a.status == b.status

    def widen(r):
        return nsigma * r.error_bound if r.method == "monte-carlo" else r.error_bound

    slack = math.hypot(widen(a), widen(b)) + rel_floor * max(abs(a.value), abs(b.value))
    return abs(a.value - b.value) <= slack
