"""Grid lower bounds for the BMO(H^n) seminorm.

The supremum over all gauge balls is replaced by a finite grid of balls, so
every number produced here is a lower bound of the seminorm, never the
seminorm itself.
"""
import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import IntegrabilityWarning, InvalidArgument
from .group import _dilate, as_point
from .mc import Moments, SeededStream, rng_of
from .sampling import sample_ball_uniform, sample_directions

DISCARD_WARN_FRACTION = 1e-3


class Ball(NamedTuple):
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class BallGrid:
    centers: np.ndarray
    radii: np.ndarray
    per_ball_samples: int = 20_000

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if len(radii) == 0 or len(centers) == 0:
            raise InvalidArgument("ball grid must be nonempty")
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise InvalidArgument("radii must be positive and strictly increasing")
        if self.per_ball_samples < 2:
            raise InvalidArgument("per_ball_samples must be >= 2")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "centers", centers)

    def balls(self):
        """Balls in grid order: centre-major, radii ascending."""
        return [Ball(c, float(r)) for c in self.centers for r in self.radii]


def default_grid(dim, stream=SeededStream(0, 0xB0), per_ball_samples=20_000,
                 n_radii=9, distances=(0.1, 1.0, 10.0), per_distance=8):
    """Identity plus ``per_distance`` random centres at each gauge distance,
    with log-spaced radii 1e-2 ... 1e2."""
    rng = rng_of(stream)
    dirs = sample_directions(rng, dim, per_distance * len(distances))
    scales = np.repeat(np.asarray(distances, dtype=float), per_distance)
    centers = np.vstack([dim.identity(), _dilate(scales, dirs)])
    return BallGrid(centers, np.logspace(-2, 2, n_radii), per_ball_samples)


@dataclass(frozen=True)
class BallStat:
    ball: Ball
    oscillation: float
    stderr: float
    n_samples: int
    discarded: int = 0


@dataclass(frozen=True)
class BmoEstimate:
    lower_bound: float
    stderr: float
    argmax_ball: Ball
    per_ball_table: list = field(default_factory=list)

    def to_csv(self, fh):
        rows = self.per_ball_table
        d = len(rows[0].ball.center) if rows else 0
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(d)] + ["radius", "oscillation", "stderr", "n_samples"])
        for s in rows:
            w.writerow([format(float(v), ".17g") for v in s.ball.center]
                       + [format(s.ball.radius, ".17g"), format(s.oscillation, ".17g"),
                          format(s.stderr, ".17g"), s.n_samples])


def _finite_values(f, pts):
    vals = np.asarray(f(pts), dtype=float)
    ok = np.isfinite(vals)
    return vals[ok], int(vals.size - np.count_nonzero(ok))


def _warn_discards(f, discarded, total):
    if total and discarded / total > DISCARD_WARN_FRACTION:
        warnings.warn(f"{f.name}: {discarded} of {total} samples were non-finite and discarded",
                      IntegrabilityWarning, stacklevel=3)


def mean_on_ball(f, dim, ball, n_samples, stream):
    """Monte-Carlo ball average f_B; returns (mean, stderr)."""
    center, radius = ball
    pts = sample_ball_uniform(dim, as_point(dim, center), radius, stream, n_samples)
    vals, discarded = _finite_values(f, pts)
    _warn_discards(f, discarded, n_samples)
    mom = Moments.of(vals)
    return mom.mean, mom.stderr


def mean_oscillation(f, dim, ball, n_samples, stream, two_pass=True):
    """(1/|B|) int_B |f - f_B|; returns (oscillation, stderr).

    Two-pass mode estimates f_B and the mean deviation from independent
    sub-streams; |E|f - c| - E|f - c'|| <= |c - c'|, so the stderr of the
    first pass is added in quadrature to the second.
    """
    stats = _oscillation(f, dim, ball, n_samples, stream, two_pass)
    return stats.oscillation, stats.stderr


def _oscillation(f, dim, ball, n_samples, stream, two_pass=True):
    center, radius = ball
    c = as_point(dim, center)
    if isinstance(stream, SeededStream):
        s1, s2 = stream.spawn(1), stream.spawn(2)
    else:
        s1 = s2 = stream
    pts = sample_ball_uniform(dim, c, radius, s1, n_samples)
    vals, disc = _finite_values(f, pts)
    first = Moments.of(vals)
    if two_pass:
        pts = sample_ball_uniform(dim, c, radius, s2, n_samples)
        vals, disc2 = _finite_values(f, pts)
        disc += disc2
        second = Moments.of(np.abs(vals - first.mean))
        err = math.hypot(second.stderr, first.stderr)
    else:
        second = Moments.of(np.abs(vals - first.mean))
        err = math.hypot(second.stderr, first.stderr)
    _warn_discards(f, disc, n_samples * (2 if two_pass else 1))
    return BallStat(Ball(c, float(radius)), second.mean, err, n_samples, disc)


def bmo_seminorm_lb(f, dim, grid, stream, threads=1, two_pass=True):
    """Largest mean oscillation over ``grid``: a lower bound of ||f||_BMO.

    ``argmax_ball`` is the first ball in grid order whose oscillation is
    statistically tied with the maximum (within 3 combined stderr). Many
    balls can share the supremum, and sampling noise alone must not decide
    between them.
    """
    balls = grid.balls()

    def run(i):
        return _oscillation(f, dim, balls[i], grid.per_ball_samples, stream.spawn(i), two_pass)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(run, range(len(balls))))
    else:
        table = [run(i) for i in range(len(balls))]
    osc = np.array([s.oscillation for s in table])
    top = int(np.argmax(osc))
    best = table[top]
    tied = [i for i, s in enumerate(table)
            if s.oscillation >= best.oscillation - 3.0 * math.hypot(s.stderr, best.stderr)]
    pick = table[tied[0]]
    return BmoEstimate(best.oscillation, best.stderr, pick.ball, table)
