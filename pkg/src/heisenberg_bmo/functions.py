"""Test functions on H^n and kernel weights for the Hausdorff family.

Evaluators are vectorised: they take an array of points with last axis
2n+1 and return one value per point. None of them depends on n, because the
vertical coordinate is always the last one.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument
from .group import _gauge

HOMOGENEITIES = ("dilation-invariant", "radial", "none")


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    known_bmo_seminorm: Optional[float] = None
    homogeneity: str = "none"
    bounded: bool = True
    note: str = ""

    def __post_init__(self):
        if self.homogeneity not in HOMOGENEITIES:
            raise InvalidArgument(f"unknown homogeneity {self.homogeneity!r}")

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def scaled(self, c):
        c = float(c)
        ev = self.evaluator
        norm = None if self.known_bmo_seminorm is None else abs(c) * self.known_bmo_seminorm
        return replace(self, name=f"{c:g}*{self.name}", evaluator=lambda x: c * ev(x),
                       known_bmo_seminorm=norm)


def _sign_vertical(x):
    return np.sign(x[..., -1])


def _one(x):
    return np.ones(x.shape[:-1])


def _zero(x):
    return np.zeros(x.shape[:-1])


def _bump(x):
    # exp(-|x|_h^4) without the quartic root
    h2 = np.sum(x[..., :-1] ** 2, axis=-1)
    return np.exp(-(h2 * h2 + x[..., -1] ** 2))


def _log_gauge(x):
    with np.errstate(divide="ignore"):
        return np.log(_gauge(x))


F0 = FunctionSpec("f0", _sign_vertical, known_bmo_seminorm=1.0, homogeneity="dilation-invariant",
                  note="sign of the vertical coordinate; 0 on the hyperplane")
ONE = FunctionSpec("one", _one, known_bmo_seminorm=0.0, homogeneity="dilation-invariant")
ZERO = FunctionSpec("zero", _zero, known_bmo_seminorm=0.0, homogeneity="dilation-invariant")
BUMP = FunctionSpec("bump", _bump, homogeneity="radial", note="exp(-|x|_h^4)")
LOG_GAUGE = FunctionSpec("log_gauge", _log_gauge, homogeneity="radial", bounded=False,
                         note="log|x|_h; unbounded, -inf at the identity")


def builtin_corpus():
    return (F0, ONE, ZERO, BUMP, LOG_GAUGE)


def get_function(name):
    """Corpus lookup; ``"2*f0"`` style names return a scaled entry."""
    scale = None
    if "*" in name:
        head, name = name.split("*", 1)
        try:
            scale = float(head)
        except ValueError:
            raise InvalidArgument(f"bad scale factor in {head!r}") from None
    for f in builtin_corpus():
        if f.name == name:
            return f if scale is None else f.scaled(scale)
    raise InvalidArgument(
        f"unknown function {name!r}; known: {', '.join(f.name for f in builtin_corpus())}")


@dataclass(frozen=True)
class PhiSpec:
    """Weight Phi(y_1, ..., y_m) of the Hausdorff family.

    ``evaluator`` takes an array of shape (..., m, 2n+1). ``radial_factor``
    is set when Phi = prod_j g(|y_j|_h); ``support_radius`` bounds every
    |y_j|_h on the support; ``finite_for(Q, beta)`` tells whether the
    constant int Phi / prod |y_j|^beta is finite.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support_radius: Optional[float] = None
    radial_factor: Optional[Callable[[float], float]] = field(default=None, repr=False)
    finite_for: Optional[Callable[[int, float], bool]] = field(default=None, repr=False)


def unit_ball_indicator_phi():
    """Phi = prod_j 1{|y_j|_h < 1}; its constant is finite iff beta < Q."""
    return PhiSpec(
        "unit-ball-indicator",
        lambda y: np.prod(_gauge(y) < 1.0, axis=-1).astype(float),
        support_radius=1.0,
        radial_factor=lambda r: 1.0 if r < 1.0 else 0.0,
        finite_for=lambda Q, beta: beta < Q,
    )


def get_phi(name):
    if name == "unit-ball-indicator":
        return unit_ball_indicator_phi()
    raise InvalidArgument(f"unknown Phi {name!r}; known: unit-ball-indicator")
