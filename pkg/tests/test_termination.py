import numpy as np
import pytest

from _support import generic_params, rand_c
from heunbeta import heun_frobenius_oracle, heun_residual, make_params, type1_transform
from heunbeta.errors import NotApplicable
from heunbeta.heun import normalized_deviation
from heunbeta.termination import (
    ExpansionDescriptor,
    certify_two_term_reduction,
    check_termination,
    necessary_conditions,
    quoted_z2_form,
    symmetric_closed_form,
    symmetric_row_certificate,
    two_term_parameters,
)
from test_acceptance import TERM_ALPHA, TERM_BETA, TERM_DELTA, TERM_GAMMA, _a2_a3, damped_newton

ORIGIN_LOW = ExpansionDescriptor(1, "zero", "low")


# -- necessary conditions ---------------------------------------------------------


def test_type1_origin_condition():
    al, ga, de = 0.4 + 0.1j, 0.3, 0.6 - 0.1j
    p = make_params(2.5, 0.3, al, ga + de - 4, ga, de)  # alpha = 3 + eps
    assert abs(p.alpha - (3 + p.epsilon)) < 1e-14
    assert necessary_conditions(p, ORIGIN_LOW) == [(3, "α = N+ε+μ")]


def test_type1_extra_point_condition():
    be, ga, de = 0.4 + 0.1j, 0.3, 0.6 - 0.1j
    p = make_params(2.5, 0.3, ga + de - 8, be, ga, de)  # beta = 5 + eps + 2
    assert abs(p.beta - (5 + p.epsilon + 2)) < 1e-14
    assert necessary_conditions(p, ExpansionDescriptor(1, "z0", "high")) == [(5, "β = N+ε+2")]


def test_five_term_condition():
    al, ga = 0.4 + 0.1j, 1.3
    de = 4 - ga
    p = make_params(2.5, 0.3, al, al + ga + de - 1, ga, de)
    assert necessary_conditions(p, ExpansionDescriptor(2, "zero", "low")) == [(2, "γ+δ = N+2")]


def test_generic_parameters_have_no_candidates():
    rng = np.random.default_rng(51)
    for _ in range(5):
        p = generic_params(rng)
        for desc in (ORIGIN_LOW, ExpansionDescriptor(2, "zero", "high")):
            assert necessary_conditions(p, desc) == []


def test_conditions_complete_against_brute_force_scan():
    rng = np.random.default_rng(52)
    for N in (1, 4, 9):
        for _ in range(3):
            p = generic_params(rng)
            p = p.replace(beta=p.gamma + p.delta - 1 - N)  # alpha = N + eps
            found = necessary_conditions(p, ORIGIN_LOW, n_max=20)
            scan = [n for n in range(1, 21)
                    if min(abs(p.alpha - (n + p.epsilon)), abs(p.beta - (n + p.epsilon))) < 1e-10]
            assert [n for n, _ in found] == scan == [N]


# -- termination checks ----------------------------------------------------------------


def test_trivial_series_terminates_at_zero():
    p = make_params(2.5, 0, 0, 0.7, 0.4, 0.3)
    rep = check_termination(p, ORIGIN_LOW, 0)
    assert rep.terminated and rep.N == 0
    assert rep.residual_of_finite_sum < 1e-12


@pytest.fixture(scope="module", params=[(0.5, 2.5), (1 + 1j, 3)])
def tuned(request):
    q, a = damped_newton(_a2_a3, request.param)
    return make_params(a, q, TERM_ALPHA, TERM_BETA, TERM_GAMMA, TERM_DELTA)


def test_tuned_series_is_a_finite_exact_solution(tuned):
    rep = check_termination(tuned, ORIGIN_LOW, 1)
    assert rep.satisfied_necessary and rep.terminated
    assert rep.residual_of_finite_sum < 1e-10
    assert rep.as_dict()["N"] == 1


def test_necessary_condition_alone_does_not_terminate():
    p = make_params(2.5, 0.3, TERM_ALPHA, TERM_BETA, TERM_GAMMA, TERM_DELTA)
    rep = check_termination(p, ORIGIN_LOW, 1)
    assert rep.satisfied_necessary and not rep.terminated
    assert rep.vanishing_checked[0][1] > 1e-10
    assert np.isnan(rep.residual_of_finite_sum)


def test_perturbed_tuning_breaks_termination(tuned):
    assert not check_termination(tuned.replace(q=tuned.q + 1e-3), ORIGIN_LOW, 1).terminated


def test_wrong_N_fails_necessary_condition(tuned):
    rep = check_termination(tuned, ORIGIN_LOW, 2)
    assert not rep.satisfied_necessary and not rep.terminated


# -- symmetric closed form -------------------------------------------------------------


def _sym(al=0.3, be=0.7, ga=0.5):
    return make_params(0.5, 0.5 * al * be, al, be, ga, ga)


def test_closed_form_needs_symmetric_parameters():
    with pytest.raises(NotApplicable):
        symmetric_closed_form(make_params(0.5, 0.1, 0.3, 0.7, 0.5, 0.5))
    with pytest.raises(NotApplicable):
        symmetric_closed_form(make_params(0.6, 0.6 * 0.21, 0.3, 0.7, 0.5, 0.5))
    with pytest.raises(NotApplicable):
        symmetric_row_certificate(make_params(0.5, 0.105, 0.3, 0.7, 0.5, 0.4))


def test_closed_form_branches_solve_the_equation():
    rng = np.random.default_rng(53)
    for _ in range(5):
        p = _sym(rand_c(rng, (0.1, 1.2)), rand_c(rng, (0.1, 1.2)), rand_c(rng, (0.2, 0.8)))
        for b in symmetric_closed_form(p):
            for z in (0.1, 0.3, 0.45, 0.7):
                u, du, ddu = b.jet(z)
                assert abs(heun_residual(p, u, du, ddu, z)) < 1e-10 * max(1, abs(u))


def test_first_branch_matches_oracle_at_a():
    p = _sym()
    b1, b2 = symmetric_closed_form(p)
    grid = np.linspace(0.1, 0.35, 6)
    o = heun_frobenius_oracle(p, 0, 300, point=0.5)
    assert normalized_deviation([b1(z) for z in grid], [o(z) for z in grid])[1] < 1e-10
    o = heun_frobenius_oracle(p, 1 - p.epsilon, 300, point=0.5)
    assert normalized_deviation([b2(z) for z in grid], [o(z) for z in grid])[1] < 1e-10


def test_vanishing_alpha_gives_constant_branch():
    p = _sym(al=0.0)
    b1, _ = symmetric_closed_form(p)
    assert all(abs(b1(z) - 1) < 1e-15 for z in (0.1, 0.3, 0.8))


def test_quoted_z2_pair_leaves_a_residual():
    p = _sym()
    first, _ = quoted_z2_form(p)
    h = 1e-4
    z = 0.3
    u = first(z)
    du = (first(z + h) - first(z - h)) / (2 * h)
    ddu = (first(z + h) - 2 * u + first(z - h)) / h**2
    assert abs(heun_residual(p, u, du, ddu, z)) > 1e-3


def test_symmetric_rows_vanish():
    cert = symmetric_row_certificate(_sym(0.4 + 0.1j, 0.9, 0.35 - 0.1j))
    assert cert.holds and max(cert.row_norms) < 1e-10
    assert cert.labels == ("S", "Q")


# -- two-term reduction ------------------------------------------------------------------


@pytest.mark.parametrize("sign", [1, -1])
def test_two_term_certificate(sign):
    p = two_term_parameters(sign)
    assert abs(p.a - np.exp(sign * 2j * np.pi / 3)) < 1e-15
    cert = certify_two_term_reduction(p)
    assert cert.holds and cert.support_ok
    assert max(cert.row_norms) < 1e-10


@pytest.mark.parametrize("sign", [1, -1])
def test_two_term_certificate_fails_for_perturbed_q(sign):
    p = two_term_parameters(sign)
    q = p.q + 1e-3
    p = make_params(p.a, q, 1, -1 - q / 2, 1 - q / 2, 2)
    cert = certify_two_term_reduction(p)
    assert not cert.holds


def test_two_term_certificate_rejects_other_families():
    with pytest.raises(NotApplicable):
        certify_two_term_reduction(make_params(2.5, 0.3, 0.4, 1.1, 0.3, 0.6))


def test_two_term_support_is_every_third_index():
    from heunbeta import build_recurrence, run_recurrence

    p = two_term_parameters(1)
    a = run_recurrence(build_recurrence(type1_transform(p).ode, 0, 0), 30)
    big = np.abs(a).max()
    assert all(abs(a[n]) < 1e-12 * big for n in range(31) if n % 3)
    assert all(abs(a[n]) > 0 for n in range(0, 31, 3))
