"""Finite-sum solutions and two-term reductions.

A series ``sum a_n J_n`` terminates at ``N`` when the top recurrence row
vanishes at ``N`` (a condition on the exponent parameters alone) and the
``order - 1`` coefficients following ``a_N`` vanish as well (conditions that
tie the accessory parameter to the rest).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotApplicable
from .expansions import (
    TransformKind,
    eval_expansion,
    make_expansion,
    make_transform,
    real_segment,
    _select_mu,
    _select_point,
)
from .heun import HeunParameters, heun_residual
from .series import build_recurrence, indicial_exponents, run_recurrence
from .special import gauss_2f1

COND_TOL = 1e-10
VANISH_TOL = 1e-10


@dataclass(frozen=True)
class ExpansionDescriptor:
    """Which expansion: transform type (1 or 2), point selector, exponent selector."""

    kind: int = 1
    point: object = "zero"
    mu: object = "high"


def _resolve(params: HeunParameters, desc: ExpansionDescriptor):
    td = make_transform(params, desc.kind)
    p = _select_point(td, desc.point)
    if td.trivial:
        return td, p, 0j
    mu = _select_mu(indicial_exponents(td.ode, p), desc.mu)
    return td, p, mu


def _fmt(x: complex) -> str:
    x = complex(x)
    if abs(x.imag) < 1e-12:
        r = x.real
        return str(int(round(r))) if abs(r - round(r)) < 1e-12 else f"{r:.6g}"
    return f"({x.real:.6g}{x.imag:+.6g}i)"


def necessary_conditions(params: HeunParameters, desc: ExpansionDescriptor,
                         n_max: int = 50, tol: float = COND_TOL) -> list[tuple[int, str]]:
    """Every ``N`` in ``1..n_max`` at which the top recurrence row vanishes.

    The top row involves only the highest-degree coefficients of the
    auxiliary equation and is therefore the same at every expansion point:

    * type 1: ``alpha = N + eps + mu`` or ``beta = N + eps + mu``;
    * type 2, quadratic: ``alpha = N + mu + eps/2`` or ``beta = ...``;
    * type 2, linear: ``gamma + delta = N + mu + 2`` or ``mu = -N``.
    """
    td, _, mu = _resolve(params, desc)
    al, be, ga, de, ep = params.alpha, params.beta, params.gamma, params.delta, params.epsilon
    m = _fmt(mu)
    # the mu = 2 branch at the extra point keeps its number; otherwise write mu
    m1 = "2" if abs(mu - 2) < tol else "μ"
    out = []
    for n in range(1, n_max + 1):
        if td.kind is TransformKind.TYPE1:
            tests = [(al - (n + ep + mu), f"α = N+ε+{m1}"), (be - (n + ep + mu), f"β = N+ε+{m1}")]
        elif td.kind is TransformKind.TYPE2_QUADRATIC:
            tests = [(al - (n + mu + ep / 2), "α = N+μ+ε/2"),
                     (be - (n + mu + ep / 2), "β = N+μ+ε/2")]
        else:
            if abs(mu) < tol:
                tests = [(ga + de - (n + 2), "γ+δ = N+2")]
            elif abs(mu - ga) < tol:
                tests = [(ga + n, "γ = −N"), (de - (n + 2), "δ = N+2")]
            else:
                tests = [(ga + de - (n + mu + 2), f"γ+δ = N+{m}+2"), (mu + n, "μ = −N")]
        for val, label in tests:
            if abs(val) < tol:
                out.append((n, label))
    return out


@dataclass(frozen=True)
class TerminationReport:
    kind: str
    point: complex
    mu: complex
    N: int
    satisfied_necessary: bool
    vanishing_checked: tuple[tuple[int, float], ...]
    terminated: bool
    residual_of_finite_sum: float

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "point": self.point,
            "mu": self.mu,
            "N": self.N,
            "satisfied_necessary": self.satisfied_necessary,
            "vanishing_checked": [list(v) for v in self.vanishing_checked],
            "terminated": self.terminated,
            "residual_of_finite_sum": self.residual_of_finite_sum,
        }


def check_termination(params: HeunParameters, desc: ExpansionDescriptor, N: int,
                      tol: float = VANISH_TOL, n_probe: int = 5) -> TerminationReport:
    """Test whether the ``desc`` expansion is a finite sum ending at ``a_N``.

    ``terminated`` requires the top row to vanish at ``N`` and
    ``|a_k| < tol * max_{j<=N} |a_j|`` for ``k = N+1 .. N+order``.  For a
    terminated series the finite-sum expansion is assembled and its Heun
    residual, relative to ``|u|``, is reported as the maximum over
    ``n_probe`` points.
    """
    td, p, mu = _resolve(params, desc)
    if td.trivial:
        exp = make_expansion(params, desc.kind, desc.point, desc.mu, n_terms=0)
        res = _probe_residual(exp, n_probe)
        return TerminationReport(td.kind.value, p, mu, 0, True, (), True, res)
    rec = build_recurrence(td.ode, p, mu)
    a = run_recurrence(rec, N + rec.order + 1)
    top = rec.coeff_polys[rec.order](N + rec.order)
    scale = max(float(np.abs(rec.row(N + rec.order)).max()), 1e-300)
    necessary = abs(top) < COND_TOL * scale
    ref = float(np.max(np.abs(a[: N + 1])))
    checked = tuple((k, float(abs(a[k]))) for k in range(N + 1, N + rec.order + 1))
    vanish = all(v < tol * ref for _, v in checked)
    terminated = bool(necessary and vanish)
    res = float("nan")
    if terminated:
        exp = make_expansion(params, desc.kind, desc.point, desc.mu, n_terms=N)
        res = _probe_residual(exp, n_probe)
    return TerminationReport(td.kind.value, p, mu, N, bool(necessary), checked, terminated, res)


def _probe_residual(exp, n_probe: int) -> float:
    lo, hi = exp.domain()
    pts = np.linspace(lo, hi, n_probe + 2)[1:-1]
    worst = 0.0
    for z in pts:
        u, du, ddu, _ = eval_expansion(exp, z)
        r = heun_residual(exp.params, u, du, ddu, z)
        worst = max(worst, abs(r) / max(abs(u), 1e-300))
    return worst


# -- symmetric case: a = 1/2, q = a alpha beta, gamma = delta ---------------------


def _check_symmetric(params: HeunParameters, tol: float = 1e-12):
    bad = []
    if abs(params.a - 0.5) >= tol:
        bad.append("a = 1/2")
    if abs(params.q - params.a * params.alpha * params.beta) >= tol:
        bad.append("q = a alpha beta")
    if abs(params.gamma - params.delta) >= tol:
        bad.append("gamma = delta")
    if bad:
        raise NotApplicable("symmetric closed form needs " + ", ".join(bad))


@dataclass(frozen=True)
class HypergeometricBranch:
    """``(2z-1)^s 2F1(A, B; C; (2z-1)^2)`` with its first two derivatives."""

    s: complex
    A: complex
    B: complex
    C: complex

    def jet(self, z) -> np.ndarray:
        z = complex(z)
        x = 2 * z - 1
        X = x * x
        f = [gauss_2f1(self.A + k, self.B + k, self.C + k, X).value for k in range(3)]
        c1 = self.A * self.B / self.C
        c2 = c1 * (self.A + 1) * (self.B + 1) / (self.C + 1)
        # d/dz F(x^2) = 4x F'(X); d2/dz2 = 8 F'(X) + 16 x^2 F''(X)
        F = np.array([f[0], 4 * x * c1 * f[1], 8 * c1 * f[1] + 16 * X * c2 * f[2]])
        s = self.s
        if s == 0:
            return F
        P = np.array([x**s, 2 * s * x ** (s - 1), 4 * s * (s - 1) * x ** (s - 2)])
        return np.array([P[0] * F[0], P[1] * F[0] + P[0] * F[1],
                         P[2] * F[0] + 2 * P[1] * F[1] + P[0] * F[2]])

    def __call__(self, z) -> complex:
        return complex(self.jet(z)[0])


def symmetric_closed_form(params: HeunParameters) -> tuple[HypergeometricBranch, HypergeometricBranch]:
    """Two hypergeometric solutions when ``a = 1/2``, ``q = a alpha beta``, ``gamma = delta``.

    The equation is then symmetric under ``z -> 1 - z`` and reduces, in
    ``x = (2z - 1)^2``, to the Gauss equation:

        u_1 = 2F1(alpha/2, beta/2; (1+eps)/2; (2z-1)^2),
        u_2 = (2z-1)^(1-eps) 2F1((alpha+1-eps)/2, (beta+1-eps)/2; (3-eps)/2; (2z-1)^2).

    These are the Frobenius solutions at ``z = 1/2`` (exponents ``0`` and
    ``1 - eps``) and converge for ``0 < z < 1``.
    """
    _check_symmetric(params)
    al, be, ep = params.alpha, params.beta, params.epsilon
    b1 = HypergeometricBranch(0j, al / 2, be / 2, (1 + ep) / 2)
    b2 = HypergeometricBranch(1 - ep, (al + 1 - ep) / 2, (be + 1 - ep) / 2, (3 - ep) / 2)
    return b1, b2


def quoted_z2_form(params: HeunParameters):
    """The ``z^2`` hypergeometric pair often quoted for the symmetric case.

    Kept so the test-suite can demonstrate that it does not solve the
    equation; use :func:`symmetric_closed_form` instead.
    """
    _check_symmetric(params)
    g = params.gamma
    r = np.sqrt(complex((g - 1) ** 2 - 4 * params.alpha * params.beta))

    def first(z):
        return gauss_2f1((g - 1 - r) / 4, (g - 1 + r) / 4, (1 + g) / 2, z * z).value

    def second(z):
        return z ** (1 - g) * gauss_2f1((1 - g - r) / 4, (1 - g + r) / 4, (3 - g) / 2, z * z).value

    return first, second


@dataclass(frozen=True)
class RowCertificate:
    """Normalized coefficient magnitudes of selected recurrence rows."""

    holds: bool
    labels: tuple[str, ...]
    row_norms: tuple[float, ...]
    support_ok: bool | None = None


def _row_norms(rec, rows) -> tuple[float, ...]:
    big = max(c.norm() for c in rec.coeff_polys)
    return tuple(rec.coeff_polys[j].norm() / big if j < len(rec.coeff_polys) else 0.0
                 for j in rows)


def symmetric_row_certificate(params: HeunParameters, mu="high",
                              tol: float = 1e-10) -> RowCertificate:
    """Check that the first (``S``) and third (``Q``) rows of the relation at
    ``z0 = q/(alpha beta)`` vanish in the symmetric case.

    There ``z0 = a`` so the point is a double root of the leading coefficient;
    the relation is built with the generic single-root alignment, which makes
    the ``S`` row structurally zero, and the ``Q`` row then vanishes by the
    symmetry.
    """
    _check_symmetric(params)
    td = make_transform(params, 1)
    p = td.z0
    mu_v = _select_mu(indicial_exponents(td.ode, p), mu)
    rec = build_recurrence(td.ode, p, mu_v, offset=1)
    norms = _row_norms(rec, (0, 2))
    return RowCertificate(all(x < tol for x in norms), ("S", "Q"), norms)


# -- two-term reduction at the origin ----------------------------------------------

TWO_TERM_SETS = tuple(
    (np.exp(s * 2j * np.pi / 3), s * 2j / np.sqrt(3)) for s in (1, -1)
)


def two_term_parameters(sign: int = 1) -> HeunParameters:
    """``a = exp(+-2 pi i/3)``, ``q = +-2i/sqrt 3``, ``alpha = 1``,
    ``beta = -1 - q/2``, ``gamma = 1 - q/2``, ``delta = 2``."""
    from .heun import make_params

    a, q = TWO_TERM_SETS[0 if sign > 0 else 1]
    return make_params(a, q, 1, -1 - q / 2, 1 - q / 2, 2)


def certify_two_term_reduction(params: HeunParameters, tol: float = 1e-10,
                               n_check: int = 12, n_support: int = 30) -> RowCertificate:
    """Certify that the middle rows ``R``, ``Q`` of the type-1 relation at 0 vanish.

    Applies to the family ``alpha = 1``, ``delta = 2``, ``beta = -1 - q/2``,
    ``gamma = 1 - q/2`` (``a``, ``q`` free).  Checks both exponents, the
    row polynomials and their values for ``n = 0..n_check``, and that the
    seeded coefficients are supported on ``n = 0 mod 3``.
    """
    q = params.q
    shape = [params.alpha - 1, params.delta - 2, params.beta + 1 + q / 2, params.gamma - 1 + q / 2]
    if max(abs(x) for x in shape) > COND_TOL:
        raise NotApplicable("parameters are outside the alpha=1, delta=2, beta=-1-q/2, gamma=1-q/2 family")
    td = make_transform(params, 1)
    holds = True
    worst = [0.0, 0.0]
    support_ok = True
    for mu in indicial_exponents(td.ode, 0):
        rec = build_recurrence(td.ode, 0, mu)
        if rec.order != 3:
            holds = False
            continue
        norms = _row_norms(rec, (1, 2))
        lead = max(float(np.abs(rec.row(n)).max()) for n in range(n_check + 1))
        vals = [max(abs(rec.row(n)[j]) for n in range(n_check + 1)) / lead for j in (1, 2)]
        worst = [max(worst[i], norms[i], vals[i]) for i in range(2)]
        if max(worst) >= tol:
            holds = False
            continue
        a = run_recurrence(rec, n_support)
        big = np.max(np.abs(a))
        off = [abs(a[n]) for n in range(n_support + 1) if n % 3]
        support_ok = support_ok and (max(off) < tol * big)
    return RowCertificate(holds, ("R", "Q"), tuple(worst), support_ok if holds else None)
