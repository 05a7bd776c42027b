import math

import numpy as np
import pytest
from scipy import stats

from heisenberg_bmo.errors import InvalidArgument
from heisenberg_bmo.group import _gauge, dilate, distance
from heisenberg_bmo.mc import SeededStream
from heisenberg_bmo.sampling import (BrokenPower, Pareto, PowerLaw, ball_acceptance_rate, gauge_polar,
                                     importance_integral, mc_ball_volume, propose_unit_ball,
                                     sample_ball_uniform, sample_directions, sample_radial_importance)


def test_ball_samples_inside(dim):
    c = np.linspace(-1, 1, dim.size)
    y = sample_ball_uniform(dim, c, 0.7, SeededStream(0, 1), 5000)
    assert y.shape == (5000, dim.size)
    assert np.all(distance(dim, y, c) < 0.7)


def test_single_sample_shape(dim1):
    y = sample_ball_uniform(dim1, dim1.identity(), 1.0, SeededStream())
    assert y.shape == (3,)


def test_vertical_mean_zero(dim1):
    y = sample_ball_uniform(dim1, dim1.identity(), 1.0, SeededStream(0, 2), 100_000)
    t = y[:, -1]
    assert abs(t.mean()) <= 3 * t.std(ddof=1) / math.sqrt(len(t))


def test_gauge_radius_distribution(dim):
    # uniform in the ball: P(|y| < s) = s^Q
    y = sample_ball_uniform(dim, dim.identity(), 1.0, SeededStream(0, 3), 20_000)
    r = _gauge(y)
    res = stats.kstest(r, lambda s: np.clip(s, 0, 1) ** dim.Q)
    assert res.pvalue > 1e-3


def test_translation_preserves_uniformity(dim1):
    # a left translate of a uniform sample of B(0, 1) is uniform on B(c, 1)
    c = np.array([0.5, -0.3, 2.0])
    y = sample_ball_uniform(dim1, c, 1.0, SeededStream(0, 4), 20_000)
    r = distance(dim1, y, c)
    assert stats.kstest(r, lambda s: np.clip(s, 0, 1) ** dim1.Q).pvalue > 1e-3


def test_acceptance_rate(dim1):
    est = ball_acceptance_rate(dim1, 1_000_000, SeededStream(0, 5))
    target = (math.pi ** 2 / 2) / 8
    assert abs(est.value - target) <= 3 * est.stderr


def test_proposal_count_consistent(dim1):
    pts, proposed = propose_unit_ball(np.random.default_rng(0), dim1, 10_000)
    assert len(pts) == 10_000
    assert 10_000 <= proposed
    assert proposed / 10_000 == pytest.approx(8 / (math.pi ** 2 / 2), rel=0.05)


def test_mc_volume_scaling(dim1):
    v1 = mc_ball_volume(dim1, 1.0, 400_000, SeededStream(0, 6))
    v2 = mc_ball_volume(dim1, 2.0, 400_000, SeededStream(0, 7))
    assert abs(v1.value - math.pi ** 2 / 2) <= 3 * v1.stderr
    ratio_err = math.hypot(v2.stderr / v1.value, v2.value * v1.stderr / v1.value ** 2)
    assert abs(v2.value / v1.value - 16.0) <= 3 * ratio_err


def test_gauge_polar_examples(dim1):
    rho, d = gauge_polar(dim1, [2.0, 0.0, 0.0])
    assert rho == 2.0 and np.array_equal(d, [1, 0, 0])
    rho, d = gauge_polar(dim1, [0.0, 0.0, 4.0])
    assert rho == 2.0 and np.array_equal(d, [0, 0, 1])
    with pytest.raises(InvalidArgument):
        gauge_polar(dim1, [0.0, 0.0, 0.0])


def test_gauge_polar_reconstructs(dim, rng):
    y = rng.normal(size=(1000, dim.size)) * 3
    rho, d = gauge_polar(dim, y)
    assert np.allclose(_gauge(d), 1.0, rtol=0, atol=1e-12)
    assert np.max(np.abs(dilate(dim, rho, d) - y)) <= 1e-12 * np.max(np.abs(y))


def test_directions_unit(dim, rng):
    d = sample_directions(rng, dim, 1000)
    assert np.allclose(_gauge(d), 1.0, atol=1e-12)


def test_power_law_estimates_volume(dim1):
    est = importance_integral(dim1, lambda y: (_gauge(y) < 1).astype(float), PowerLaw(1.0),
                              1_000_000, SeededStream(0, 8))
    # zero variance: every draw lies in the ball
    assert abs(est.value - dim1.omega_cap) <= 3 * est.stderr + 1e-12 * dim1.omega_cap


def test_power_law_with_kappa(dim1):
    # int_{|y| < 1} |y|^-1 dy = omega / (Q - 1)
    est = importance_integral(dim1, lambda y: 1.0 / _gauge(y), PowerLaw(1.0, 1.0),
                              200_000, SeededStream(0, 9))
    assert est.value == pytest.approx(dim1.omega_sphere / 3, rel=1e-12)


def test_pareto_tail_integral(dim1):
    # int_{|y| > 1} |y|^-8 dy = omega / 4
    est = importance_integral(dim1, lambda y: _gauge(y) ** -8.0, Pareto(4.0), 200_000, SeededStream(0, 10))
    assert est.value == pytest.approx(dim1.omega_sphere / 4, rel=1e-9)


def test_broken_power_integral(dim1):
    # int 1/(1 + |y|^8) dy = pi^3 / 4 for n = 1
    est = importance_integral(dim1, lambda y: 1.0 / (1.0 + _gauge(y) ** 8), BrokenPower(8.0),
                              400_000, SeededStream(0, 11))
    assert abs(est.value - math.pi ** 3 / 4) <= 3 * est.stderr
    assert est.stderr / est.value < 0.01


def test_broken_power_sampler_cdf(dim1):
    bp = BrokenPower(8.0)
    r = bp.sample(np.random.default_rng(1), dim1, 50_000)
    Z = bp._norm(dim1)

    def cdf(s):
        s = np.asarray(s)
        lo = s ** 4 / 4
        hi = 0.25 + (1 - s ** -4.0) / 4
        return np.where(s < 1, lo, hi) / Z

    assert stats.kstest(r, cdf).pvalue > 1e-3


def test_weights_positive(dim1):
    for dens in (PowerLaw(2.0), PowerLaw(1.0, 2.0), Pareto(1.0), BrokenPower(6.0)):
        _, w = sample_radial_importance(dim1, dens, SeededStream(0, 12), 1000)
        assert np.all(w > 0)


def test_stderr_scales_like_root_n(dim1):
    def f(y):
        return 1.0 / (1.0 + _gauge(y) ** 8)

    small = importance_integral(dim1, f, BrokenPower(8.0), 10_000, SeededStream(0, 13))
    large = importance_integral(dim1, f, BrokenPower(8.0), 1_000_000, SeededStream(0, 14))
    ratio = small.stderr / large.stderr
    assert 5 <= ratio <= 20


def test_invalid_densities(dim1):
    with pytest.raises(InvalidArgument):
        BrokenPower(4.0).check(dim1)
    with pytest.raises(InvalidArgument):
        PowerLaw(1.0, 4.0).check(dim1)
    with pytest.raises(InvalidArgument):
        Pareto(0.0).check(dim1)
    with pytest.raises(InvalidArgument):
        sample_ball_uniform(dim1, dim1.identity(), 0.0, SeededStream(), 3)


def test_sampling_deterministic(dim1):
    a = sample_ball_uniform(dim1, dim1.identity(), 1.0, SeededStream(5, 5), 100)
    b = sample_ball_uniform(dim1, dim1.identity(), 1.0, SeededStream(5, 5), 100)
    assert np.array_equal(a, b)
