"""Gamma function by the Lanczos approximation (g = 7, 9 terms).

Relative accuracy is better than 1e-13 on (0, 50); the reflection formula
covers arguments below 1/2.
"""
import math

from .errors import InvalidArgument

_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise InvalidArgument(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _COEF[0]
    for k in range(1, len(_COEF)):
        acc += _COEF[k] / (x + k)
    t = x + _G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def beta(a, b):
    return gamma(a) * gamma(b) / gamma(a + b)
