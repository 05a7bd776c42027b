import math

import pytest

from heisenberg_bmo.constants import (ConstantQuery, agree, all_methods, closed_form_A, closed_form_B,
                                      convergence_threshold, mc_constant, literal_exponent_condition,
                                      quad_constant)
from heisenberg_bmo.errors import InvalidArgument
from heisenberg_bmo.functions import unit_ball_indicator_phi
from heisenberg_bmo.mc import SeededStream
from heisenberg_bmo.operators import QuadratureConfig


def test_threshold():
    assert convergence_threshold("A", 1, 1) == 4
    assert convergence_threshold("B", 1, 2) == 6
    assert convergence_threshold("A", 1, 3) == convergence_threshold("A", 5, 3)


def test_closed_form_values():
    assert closed_form_A(1, 1, 5).value == pytest.approx(5 * math.pi ** 2 / 2, rel=1e-13)
    assert closed_form_A(2, 1, 8).value == pytest.approx(math.pi ** 4 / 2, rel=1e-13)
    assert closed_form_B(1, 1, 8).value == pytest.approx(math.pi ** 3 / 4, rel=1e-13)
    assert closed_form_B(2, 1, 8).value == pytest.approx(math.pi ** 5 / 16, rel=1e-13)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_literal_exponent_divergent(m):
    for n in (1, 2, 3):
        r = literal_exponent_condition("A", m, n)
        assert r.status == "divergent"
        assert closed_form_A(m, n, float(n)).status == "divergent"
        assert closed_form_B(m, n, float(n)).status == "divergent"


def test_divergence_reason():
    r = closed_form_B(1, 1, 4.0)
    assert not r.finite and "beta ≤ Q = 4" in r.reason


@pytest.mark.parametrize("family,m,n,beta,tol", [
    ("A", 1, 1, 5.0, 1e-8), ("B", 1, 1, 8.0, 1e-8), ("B", 2, 1, 8.0, 1e-6),
    ("A", 2, 2, 7.0, 1e-6), ("A", 3, 1, 5.0, 1e-6), ("B", 3, 1, 6.0, 1e-6)])
def test_quadrature_matches_closed_form(family, m, n, beta, tol):
    q = ConstantQuery(family, m, n, beta)
    closed = closed_form_A(m, n, beta) if family == "A" else closed_form_B(m, n, beta)
    quad = quad_constant(q)
    assert quad.value == pytest.approx(closed.value, rel=tol)
    assert abs(quad.value - closed.value) <= quad.error_bound


def test_mc_matches_closed_form():
    q = ConstantQuery("A", 2, 1, 8.0)
    r = mc_constant(q, QuadratureConfig(1_000_000, stream=SeededStream(0, 1)))
    assert abs(r.value - math.pi ** 4 / 2) <= 3 * r.error_bound
    assert r.n_samples == 1_000_000


def test_truncated_growth():
    vals = [mc_constant(ConstantQuery("A", 1, 1, 1.0),
                        QuadratureConfig(200_000, truncation_radius=R, stream=SeededStream(0, 2)))
            for R in (10.0, 100.0, 1000.0)]
    assert all(v.truncated and v.finite for v in vals)
    assert vals[1].value > 2 * vals[0].value and vals[2].value > 2 * vals[1].value


def test_family_f_indicator():
    phi = unit_ball_indicator_phi()
    for m, beta in ((1, 1.0), (2, 2.5)):
        q = ConstantQuery("F", m, 1, beta, phi)
        exact = (2 * math.pi ** 2 / (4 - beta)) ** m
        assert quad_constant(q).value == pytest.approx(exact, rel=1e-9)
        r = mc_constant(q, QuadratureConfig(20_000))
        assert r.value == pytest.approx(exact, rel=1e-12)
    assert quad_constant(ConstantQuery("F", 1, 1, 4.0, phi)).status == "divergent"


def test_all_methods_agree():
    q = ConstantQuery("B", 2, 2, 10.0)
    rs = all_methods(q, QuadratureConfig(400_000, stream=SeededStream(0, 3)))
    assert [r.method for r in rs] == ["closed-form", "radial-quadrature", "monte-carlo"]
    for i in range(3):
        for j in range(i + 1, 3):
            assert agree(rs[i], rs[j])


def test_query_validation():
    with pytest.raises(InvalidArgument):
        ConstantQuery("C", 1, 1, 5.0)
    with pytest.raises(InvalidArgument):
        ConstantQuery("A", 0, 1, 5.0)
    with pytest.raises(InvalidArgument):
        quad_constant(ConstantQuery("A", 4, 1, 5.0))


def test_gamma_formula_omega_doubles_value():
    a = closed_form_A(1, 1, 5.0, "paper-formula").value
    assert a == pytest.approx(2 * closed_form_A(1, 1, 5.0).value, rel=1e-12)
