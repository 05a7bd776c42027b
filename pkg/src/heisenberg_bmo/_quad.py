import math

from scipy import integrate

from .errors import AccuracyFailure


def adaptive_quad(fn, a, b, epsabs=1e-10, epsrel=1e-10, limit=200, points=None,
                  weight=None, wvar=None):
    """scipy QUADPACK call that raises ``AccuracyFailure`` instead of warning."""
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kwargs["points"] = pts
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    out = integrate.quad(fn, a, b, **kwargs)
    value, err = out[0], out[1]
    ier_failed = len(out) > 3
    if not math.isfinite(value) or (ier_failed and err > max(epsabs, epsrel * abs(value))):
        raise AccuracyFailure(f"quadrature on [{a}, {b}] did not converge", value, err)
    return value, err
