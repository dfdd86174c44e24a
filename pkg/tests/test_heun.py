import numpy as np
import pytest

from _support import generic_params
from heunbeta import heun_frobenius_oracle, heun_residual, make_params
from heunbeta.errors import (
    EvaluationAtSingularity,
    ParameterError,
    Resonance,
    SingularityCollision,
)
from heunbeta.heun import HeunParameters, jet_mul, normalized_deviation, power_jet
from heunbeta.termination import symmetric_closed_form, two_term_parameters


def test_epsilon_from_fuchsian_relation():
    assert make_params(2, 0, 1, 1, 1, 1).epsilon == 1
    p = make_params(0.5, 0.5 * 0.3 * 0.7, 0.3, 0.7, 0.5, 0.5)
    assert abs(p.epsilon - (1 + 0.3 + 0.7 - 1.0)) < 1e-15


def test_two_term_set_has_epsilon_minus_two():
    for sign in (1, -1):
        p = two_term_parameters(sign)
        assert abs(1 + p.alpha + p.beta - p.gamma - p.delta - (-2)) < 1e-14
        assert abs(p.epsilon + 2) < 1e-14


@pytest.mark.parametrize("a", [0, 1])
def test_collision_of_a_with_other_singularity(a):
    with pytest.raises(SingularityCollision):
        make_params(a, 0.1, 0.2, 0.3, 0.4, 0.5)


def test_inconsistent_explicit_epsilon_rejected():
    with pytest.raises(ParameterError):
        HeunParameters(2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7)
    assert abs(make_params(2, 0.1, 0.2, 0.3, 0.4, 0.5, "auto").epsilon - 0.6) < 1e-15


def test_replace_recomputes_epsilon():
    p = make_params(2, 0.1, 0.2, 0.3, 0.4, 0.5)
    r = p.replace(alpha=1.2)
    assert abs(r.epsilon - (p.epsilon + 1)) < 1e-15


def test_oracle_leading_coefficients():
    rng = np.random.default_rng(21)
    for _ in range(10):
        p = generic_params(rng)
        c = heun_frobenius_oracle(p, 0, 20).coeffs
        assert c[0] == 1
        assert abs(c[1] - p.q / (p.a * p.gamma)) < 1e-12 * abs(c[1])


def test_constant_solution():
    p = make_params(2.5, 0, 0, 0.7, 0.4, 0.3)
    c = heun_frobenius_oracle(p, 0, 30).coeffs
    assert np.all(c[1:] == 0)


def test_oracle_matches_symmetric_closed_form_at_a():
    p = make_params(0.5, 0.5 * 0.3 * 0.7, 0.3, 0.7, 0.5, 0.5)
    b1, _ = symmetric_closed_form(p)
    o = heun_frobenius_oracle(p, 0, 300, point=p.a)
    grid = [0.3, 0.35, 0.6, 0.7]
    _, dev = normalized_deviation([b1(z) for z in grid], [o(z) for z in grid])
    assert dev < 1e-10


def test_residual_examples():
    p = make_params(2.5, 0.3, 0.4, 1.1, 0.3, 0.6)
    assert heun_residual(p, 0, 0, 0, 0.3) == 0
    z = 0.3
    expect = (-p.q + p.alpha * p.beta * z) / (z * (z - 1) * (z - p.a))
    assert abs(heun_residual(p, 1, 0, 0, z) - expect) < 1e-15
    with pytest.raises(EvaluationAtSingularity):
        heun_residual(p, 1, 0, 0, p.a)


def test_oracle_jet_solves_the_equation():
    rng = np.random.default_rng(22)
    for _ in range(10):
        p = generic_params(rng)
        for ex in (0, 1 - p.gamma):
            o = heun_frobenius_oracle(p, ex, 300)
            u, du, ddu = o.jet(0.3, 2)
            assert abs(heun_residual(p, u, du, ddu, 0.3)) < 1e-9 * max(1, abs(u))


def test_origin_solutions_are_independent():
    rng = np.random.default_rng(23)
    z = 0.1
    for _ in range(20):
        p = generic_params(rng)
        u0, du0 = heun_frobenius_oracle(p, 0, 200).jet(z, 1)
        u1, du1 = heun_frobenius_oracle(p, 1 - p.gamma, 200).jet(z, 1)
        assert abs(u0 * du1 - u1 * du0) > 1e-8


def test_exponent_must_be_indicial():
    p = make_params(2.5, 0.3, 0.4, 1.1, 0.3, 0.6)
    with pytest.raises(ParameterError):
        heun_frobenius_oracle(p, 0.123)


def test_resonant_second_exponent():
    # gamma = -1: the leading coefficient n (n - 1 + gamma) vanishes at n = 2
    p = make_params(2.5, 0.3, 0.4, 1.1, -1, 0.6)
    with pytest.raises(Resonance):
        heun_frobenius_oracle(p, 0, 20)


def test_ordinary_point_oracle_uses_slope():
    p = make_params(2.5, 0.3, 0.4, 1.1, 0.3, 0.6)
    o = heun_frobenius_oracle(p, 0, 200, point=0.4, slope=0.7)
    u, du = o.jet(0.4, 1)
    assert abs(u - 1) < 1e-15 and abs(du - 0.7) < 1e-15


def test_jet_helpers():
    z = 0.37
    pj = power_jet(z, 0.1, 2.5, 3)
    t = z - 0.1
    assert np.allclose(pj, [t**2.5, 2.5 * t**1.5, 3.75 * t**0.5, 1.875 * t**-0.5])
    f = np.array([z**2, 2 * z, 2.0])
    g = np.array([np.exp(z), np.exp(z), np.exp(z)])
    h = jet_mul(f, g)
    assert np.allclose(h, [z**2 * np.exp(z), (z**2 + 2 * z) * np.exp(z), (z**2 + 4 * z + 2) * np.exp(z)])
