"""Expansions of Heun solutions in incomplete Beta and Appell F1 functions.

Two transforms carry a Heun solution ``u`` to an auxiliary Fuchsian equation:

* type 1: ``v = z^gamma (z-1)^delta u'``;
* type 2: ``u = (z-a)^(-eps/2) w`` and ``v = z^gamma (z-1)^delta w'``.

A Frobenius series ``v = (z-p)^mu sum a_n (z-p)^n`` is integrated termwise:

    u = E(z) [C0 + sum_n a_n J_n(z)],   J_n' = z^-gamma (z-1)^-delta (z-p)^(mu+n),

with ``E = 1`` (type 1) or ``(z-a)^(-eps/2)`` (type 2).  Every ``J_n`` is
anchored at the expansion point, ``J_n(p) = 0``; the resulting constant shift
relative to other anchorings is absorbed into ``C0``, which is fixed by
requiring the Heun residual to vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DegeneratePi,
    DegenerateZ0,
    DomainError,
    InconsistentC0,
    NoConvergence,
    ParameterError,
    UnsupportedDomain,
)
from .heun import (
    HeunParameters,
    OracleSolution,
    heun_frobenius_oracle,
    heun_residual,
    local_radius,
    normalized_deviation,
)
from .series import (
    ComplexPoly,
    FrobeniusSeries,
    RationalODE,
    build_recurrence,
    indicial_exponents,
    ratio_limit,
    run_recurrence,
)
from .special import appell_f1_batch, beta_scaled_batch

SNAP_TOL = 1e-12
LINEAR_TOL = 1e-10
C0_RTOL = 1e-8
EVAL_FRACTION = 0.8

BRANCH_CONVENTIONS = {
    "powers": "principal branch, arg in (-pi, pi]",
    "point_one_phase": "(z-1)^(mu-delta) = exp(i*pi*(mu-delta)) (1-z)^(mu-delta) for real z < 1",
    "appell_prefactor": "z1^-gamma (z1-1)^-delta, principal branch, factored out of the integrand",
    "anchoring": "term integrals vanish at the expansion point; constant offsets live in C0",
}


class TransformKind(str, Enum):
    TYPE1 = "Type1"
    TYPE2_QUADRATIC = "Type2Quadratic"
    TYPE2_LINEAR = "Type2Linear"


class TermFamily(str, Enum):
    BETA_AT_ZERO = "BetaAtZero"
    BETA_AT_ONE = "BetaAtOne"
    APPELL_GENERAL = "AppellGeneral"
    BETA_DELTA_ZERO = "BetaDeltaZero"
    BETA_GAMMA_ZERO = "BetaGammaZero"


@dataclass(frozen=True)
class TransformData:
    """Auxiliary equation obeyed by ``v``, with its accessory polynomial.

    ``pi`` is the accessory polynomial; ``z0`` is set for type 1, ``z1`` (and
    ``z2`` for a quadratic ``pi``) for type 2, where ``pi = p0 (z-z1)(z-z2)``
    or ``pi = p1 (z-z1)``.
    """

    kind: TransformKind
    params: HeunParameters
    ode: RationalODE
    pi: ComplexPoly
    z0: complex | None = None
    p0: complex | None = None
    p1: complex | None = None
    z1: complex | None = None
    z2: complex | None = None
    trivial: bool = False

    @property
    def extra_points(self) -> tuple[complex, ...]:
        """Singular points of the auxiliary equation absent from Heun's."""
        if self.kind is TransformKind.TYPE1:
            return (self.z0,)
        if self.kind is TransformKind.TYPE2_QUADRATIC:
            return (self.z1, self.z2)
        return (self.z1,)

    @property
    def singular_points(self) -> tuple[complex, ...]:
        return self.params.singular_points() + self.extra_points

    @property
    def is_type2(self) -> bool:
        return self.kind is not TransformKind.TYPE1


def _snap(z: complex, targets) -> complex:
    for s in targets:
        if abs(z - s) <= SNAP_TOL * max(1.0, abs(s)):
            return complex(s)
    return complex(z)


def type1_pi(params: HeunParameters, z0: complex) -> ComplexPoly:
    """Accessory polynomial of the type-1 auxiliary equation."""
    al, be, ga, ep = params.alpha, params.beta, params.gamma, params.epsilon
    ab = al * be
    return ComplexPoly([
        z0 * (z0 * ab + ep - ga * ep),
        ga * ep - z0 * (2 * ab + ep * (1 - al - be) + ep**2),
        (al - ep) * (be - ep),
    ])


def type2_pi(params: HeunParameters) -> ComplexPoly:
    """Accessory polynomial of the equation for ``w = (z-a)^(eps/2) u``."""
    a, q = params.a, params.q
    al, be, ga, de, ep = params.alpha, params.beta, params.gamma, params.delta, params.epsilon
    h = ep / 2
    return ComplexPoly([
        a * (q - ga * h),
        h * h + h * (ga - 1 + a * ga + a * de) - (q + a * al * be),
        (al - h) * (be - h),
    ])


def _cleared_ode(params: HeunParameters, c_prime: complex, extra: ComplexPoly,
                 a_power: int, p0: ComplexPoly) -> RationalODE:
    """Common-denominator form of

        v'' + ((1-g)/z + (1-d)/(z-1) + c'/(z-a) - extra'/extra) v' + ... = 0

    multiplied by ``z (z-1) (z-a)^a_power extra``.
    """
    g, d, a = params.gamma, params.delta, params.a
    z = ComplexPoly([0, 1])
    zm1 = ComplexPoly([-1, 1])
    zma = ComplexPoly([-a, 1])
    zmak = ComplexPoly([1])
    for _ in range(a_power):
        zmak = zmak * zma
    base = z * zm1 * zmak
    p2 = base * extra
    # c'/(z-a) contributes c' z (z-1) (z-a)^(a_power-1)
    lower = ComplexPoly([1])
    for _ in range(a_power - 1):
        lower = lower * zma
    bracket = (1 - g) * (zm1 * zmak) + (1 - d) * (z * zmak) + c_prime * (z * zm1 * lower)
    p1 = bracket * extra - base * extra.deriv()
    return RationalODE(p2, p1, p0)


def type1_transform(params: HeunParameters) -> TransformData:
    """Auxiliary equation for ``v = z^gamma (z-1)^delta u'``.

    Five regular singular points ``0, 1, a, z0 = q/(alpha beta), inf``.  When
    ``q = alpha beta = 0`` the Heun equation has the constant solution and we
    place ``z0 = 0`` by convention (flagged ``trivial``).
    """
    ab = params.alpha * params.beta
    trivial = False
    if ab == 0:
        if params.q != 0:
            raise DegenerateZ0("alpha*beta = 0 with q != 0 sends z0 to infinity")
        z0 = 0j
        trivial = True
    else:
        z0 = _snap(params.q / ab, params.singular_points())
    pi = type1_pi(params, z0)
    extra = ComplexPoly([-z0, 1])
    ode = _cleared_ode(params, 1 + params.epsilon, extra, 1, pi)
    return TransformData(TransformKind.TYPE1, params, ode, pi, z0=z0, trivial=trivial)


def _quadratic_roots(c0: complex, c1: complex, c2: complex) -> tuple[complex, complex]:
    disc = np.sqrt(complex(c1 * c1 - 4 * c2 * c0))
    s = disc if abs(c1 + disc) >= abs(c1 - disc) else -disc
    qq = -(c1 + s) / 2
    if qq == 0:
        return 0j, 0j
    return complex(qq / c2), complex(c0 / qq)


def type2_transform(params: HeunParameters) -> TransformData:
    """Auxiliary equation after ``u = (z-a)^(-eps/2) w``, ``v = z^gamma (z-1)^delta w'``.

    Quadratic accessory polynomial: six singular points, roots ordered so
    that ``|z1| <= |z2|``.  If ``eps = 2 alpha`` or ``2 beta`` the polynomial
    is linear and there are five.
    """
    pi = type2_pi(params)
    c0, c1, c2 = pi[0], pi[1], pi[2]
    h = params.epsilon / 2
    scale = max(1.0, abs(params.alpha), abs(params.beta), abs(params.epsilon))
    linear = min(abs(params.alpha - h), abs(params.beta - h)) < LINEAR_TOL * scale
    targets = params.singular_points()
    if linear:
        pi = ComplexPoly([c0, c1])
        pscale = max(1.0, abs(c0), abs(params.q), abs(params.a))
        if abs(c1) < LINEAR_TOL * pscale:
            raise DegeneratePi("accessory polynomial is constant")
        z1 = _snap(-c0 / c1, targets)
        extra = ComplexPoly([-z1, 1])
        ode = _cleared_ode(params, 2, extra, 2, pi * extra)
        return TransformData(TransformKind.TYPE2_LINEAR, params, ode, pi, p1=complex(c1), z1=z1)
    r1, r2 = _quadratic_roots(c0, c1, c2)
    r1, r2 = sorted((_snap(r1, targets), _snap(r2, targets)), key=abs)
    extra = ComplexPoly.from_roots([r1, r2])
    ode = _cleared_ode(params, 2, extra, 2, pi * extra)
    return TransformData(
        TransformKind.TYPE2_QUADRATIC, params, ode, pi, p0=complex(c2), z1=r1, z2=r2
    )


def make_transform(params: HeunParameters, kind) -> TransformData:
    kind = _parse_kind(kind)
    return type1_transform(params) if kind == 1 else type2_transform(params)


def _parse_kind(kind) -> int:
    if kind in (1, "1", "type1", TransformKind.TYPE1):
        return 1
    if kind in (2, "2", "type2", TransformKind.TYPE2_QUADRATIC, TransformKind.TYPE2_LINEAR):
        return 2
    raise ParameterError(f"unknown transform kind {kind!r}")


# -- expansion ---------------------------------------------------------------


@dataclass(frozen=True)
class C0Certificate:
    """Two independent pointwise determinations of C0 and their agreement."""

    points: tuple[float, float]
    values: tuple[complex, complex]
    rel_diff: float


@dataclass(frozen=True)
class BetaExpansion:
    transform: TransformData
    expansion_point: complex
    mu: complex
    c0: complex
    series: FrobeniusSeries
    prefactor_epsilon_half: bool
    term_family: TermFamily
    radius: float
    certificate: C0Certificate | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def params(self) -> HeunParameters:
        return self.transform.params

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    def domain(self) -> tuple[float, float]:
        """Real evaluation segment: ``(0, 1)`` within ``0.8 * radius`` of the point."""
        return real_segment(self.expansion_point, EVAL_FRACTION * self.radius)

    def __call__(self, z) -> complex:
        return eval_expansion(self, z)[0]


def real_segment(point: complex, r: float, lo: float = 0.0, hi: float = 1.0):
    """Intersection of the real interval ``(lo, hi)`` with the disk ``|z - point| <= r``."""
    point = complex(point)
    if not np.isfinite(r):
        return lo, hi
    h = r * r - point.imag**2
    if h <= 0:
        raise UnsupportedDomain(f"disk of radius {r:.3g} about {point} misses the real axis")
    w = np.sqrt(h)
    a, b = max(lo, point.real - w), min(hi, point.real + w)
    if b <= a:
        raise UnsupportedDomain(f"no real evaluation segment in (0, 1) within {r:.3g} of {point}")
    return float(a), float(b)


def _select_point(td: TransformData, selector) -> complex:
    if isinstance(selector, str):
        s = selector.lower()
        table = {"zero": 0j, "0": 0j, "one": 1 + 0j, "1": 1 + 0j, "a": td.params.a}
        if s in table:
            return complex(table[s])
        if s == "z0":
            return td.z0 if td.kind is TransformKind.TYPE1 else td.z1
        if s == "z1" and td.is_type2:
            return td.z1
        if s == "z2" and td.kind is TransformKind.TYPE2_QUADRATIC:
            return td.z2
        raise ParameterError(f"unknown expansion point selector {selector!r}")
    return complex(selector)


def _select_mu(exps, selector) -> complex:
    if isinstance(selector, str):
        s = selector.lower()
        if s == "low":
            return exps[0]
        if s == "high":
            return exps[1]
        raise ParameterError(f"unknown mu selector {selector!r}")
    mu = complex(selector)
    if min(abs(mu - e) for e in exps) > 1e-10:
        raise ParameterError(f"mu={mu} is not an exponent {exps}")
    return mu


def _is_zero(x, tol=1e-14) -> bool:
    return abs(x) < tol


def _auto_family(params: HeunParameters, point: complex) -> TermFamily:
    if point == 0:
        return TermFamily.BETA_AT_ZERO
    if point == 1:
        return TermFamily.BETA_AT_ONE
    if _is_zero(params.delta):
        return TermFamily.BETA_DELTA_ZERO
    if _is_zero(params.gamma):
        return TermFamily.BETA_GAMMA_ZERO
    return TermFamily.APPELL_GENERAL


def _check_family(params: HeunParameters, point, mu, family: TermFamily):
    if family is TermFamily.BETA_AT_ZERO:
        if point != 0:
            raise ParameterError("BetaAtZero terms need expansion point 0")
        p = 1 - params.gamma + mu
        if p.real <= 0:
            raise UnsupportedDomain(f"Beta terms need Re(1 - gamma + mu) > 0, got {p}")
    elif family is TermFamily.BETA_AT_ONE:
        if point != 1:
            raise ParameterError("BetaAtOne terms need expansion point 1")
        p = 1 - params.delta + mu
        if p.real <= 0:
            raise UnsupportedDomain(f"Beta terms need Re(1 - delta + mu) > 0, got {p}")
    else:
        if point in (0, 1):
            raise ParameterError(f"{family.value} terms need an expansion point other than 0, 1")
        if (1 + mu).real <= 0:
            raise UnsupportedDomain(f"term integrals need Re(1 + mu) > 0, got mu={mu}")
        if family is TermFamily.BETA_DELTA_ZERO and not _is_zero(params.delta):
            raise ParameterError("BetaDeltaZero terms need delta = 0")
        if family is TermFamily.BETA_GAMMA_ZERO and not _is_zero(params.gamma):
            raise ParameterError("BetaGammaZero terms need gamma = 0")


def make_expansion(
    params: HeunParameters,
    kind=1,
    point="zero",
    mu="high",
    n_terms: int = 200,
    family: TermFamily | str | None = None,
    slope: complex = 0,
    strict_c0: bool = True,
) -> BetaExpansion:
    """Assemble an evaluable expansion of a Heun solution.

    ``point`` is one of ``"zero"``, ``"one"``, ``"a"``, ``"z0"`` (the extra
    singular point of the transform: ``q/(alpha beta)`` for type 1, ``z1`` for
    type 2), ``"z2"`` or a complex number.  ``mu`` is ``"low"``, ``"high"`` or
    an explicit exponent.  At an ordinary point with ``mu = 0`` the free
    coefficient ``a_1`` is set to ``slope``.  With ``strict_c0=False`` a
    failed C0 consistency check is recorded in the certificate instead of
    raising (useful for deliberately truncated series).
    """
    td = make_transform(params, kind)
    p = _select_point(td, point)
    fam = TermFamily(family) if family is not None else _auto_family(params, p)
    radius = local_radius(p, td.singular_points)

    if td.trivial:
        mu_v = _select_mu((0j, 0j), "low") if isinstance(mu, str) else complex(mu)
        series = FrobeniusSeries(p, mu_v, np.zeros(n_terms + 1, dtype=complex))
        exp = BetaExpansion(td, p, mu_v, 1 + 0j, series, False, fam, radius,
                            None, _metadata(td, fam, trivial=True))
        return exp

    exps = indicial_exponents(td.ode, p)
    mu_v = _select_mu(exps, mu)
    _check_family(params, p, mu_v, fam)
    rec = build_recurrence(td.ode, p, mu_v)
    ordinary = all(abs(p - s) > 1e-12 for s in td.singular_points)
    free = {1: slope} if ordinary and abs(mu_v) < 1e-10 else None
    coeffs = run_recurrence(rec, n_terms, free=free)
    series = FrobeniusSeries(p, mu_v, coeffs)
    draft = BetaExpansion(td, p, mu_v, 0j, series, td.is_type2, fam, radius,
                          None, _metadata(td, fam, order=rec.order))
    c0, cert = determine_c0(draft, strict=strict_c0)
    return BetaExpansion(td, p, mu_v, c0, series, td.is_type2, fam, radius, cert, draft.metadata)


def _metadata(td: TransformData, fam: TermFamily, trivial: bool = False, order=None) -> dict:
    meta = {"kind": td.kind.value, "family": fam.value, "branches": dict(BRANCH_CONVENTIONS)}
    if trivial:
        meta["trivial"] = "q = alpha*beta = 0: constant solution, z0 placed at 0"
    if order is not None:
        meta["recurrence_terms"] = order + 1
    return meta


# -- evaluation --------------------------------------------------------------


def _integrand_log_derivative(exp: BetaExpansion, z: complex) -> complex:
    g, d, mu, p = exp.params.gamma, exp.params.delta, exp.mu, exp.expansion_point
    fam = exp.term_family
    if fam is TermFamily.BETA_AT_ZERO:
        return (mu - g) / z + d / (1 - z)
    if fam is TermFamily.BETA_AT_ONE:
        return -g / z - (mu - d) / (1 - z)
    return -g / z - d / (z - 1) + (mu / (z - p) if mu != 0 else 0)


def _integrand_prefactor(exp: BetaExpansion, z: complex) -> complex:
    """``g(z)`` with ``u_series' = g(z) sum a_n (z-p)^n``."""
    g, d, mu, p = exp.params.gamma, exp.params.delta, exp.mu, exp.expansion_point
    fam = exp.term_family
    if fam is TermFamily.BETA_AT_ZERO:
        return z ** (mu - g) * (1 - z) ** (-d)
    if fam is TermFamily.BETA_AT_ONE:
        return np.exp(1j * np.pi * (mu - d)) * z ** (-g) * (1 - z) ** (mu - d)
    k = _appell_constant(exp)
    out = k * (z / p) ** (-g) * ((z - 1) / (p - 1)) ** (-d)
    return out * (z - p) ** mu if mu != 0 else out


def _appell_constant(exp: BetaExpansion) -> complex:
    p, g, d = exp.expansion_point, exp.params.gamma, exp.params.delta
    k = 1 + 0j
    if not _is_zero(g):
        k *= p ** (-g)
    if not _is_zero(d):
        k *= (p - 1) ** (-d)
    return k


def term_integrals(exp: BetaExpansion, z: complex):
    """``(J_n(z), tail_n)`` for every coefficient index ``n``."""
    prm, mu, p = exp.params, exp.mu, exp.expansion_point
    n = np.arange(len(exp.coeffs))
    t = z - p
    fam = exp.term_family
    if fam is TermFamily.BETA_AT_ZERO:
        pn = 1 - prm.gamma + mu + n
        sig, tail = beta_scaled_batch(pn, 1 - prm.delta, z)
        pw = z ** pn
        return pw * sig, np.abs(pw) * tail
    if fam is TermFamily.BETA_AT_ONE:
        pn = 1 + mu - prm.delta + n
        sig, tail = beta_scaled_batch(pn, 1 - prm.gamma, 1 - z)
        pw = -np.exp(1j * np.pi * (mu - prm.delta)) * (-1.0) ** n * (1 - z) ** pn
        return pw * sig, np.abs(pw) * tail
    an = mu + n + 1
    x = 1 - z / p
    y = t / (1 - p)
    if fam is TermFamily.APPELL_GENERAL:
        f, tail = appell_f1_batch(an, prm.gamma, prm.delta, x, y)
        sig, tail = f / an, tail / np.abs(an)
    elif fam is TermFamily.BETA_DELTA_ZERO:
        sig, tail = beta_scaled_batch(an, 1 - prm.gamma, x)
    else:
        sig, tail = beta_scaled_batch(an, 1 - prm.delta, y)
    pw = _appell_constant(exp) * t ** (n + 1.0)
    if mu != 0:
        pw = pw * t**mu
    return pw * sig, np.abs(pw) * tail


def _series_jet(exp: BetaExpansion, z: complex):
    """``(W, W', W'')`` of the bracketed sum without ``C0``, plus a tail bound."""
    a = exp.coeffs
    if not np.any(a):
        return np.zeros(3, dtype=complex), 0.0
    j, tails = term_integrals(exp, z)
    w = np.sum(a * j)
    s = FrobeniusSeries(exp.expansion_point, 0, a).power_sums(z, 1)
    g = _integrand_prefactor(exp, z)
    dw = g * s[0]
    ddw = g * (_integrand_log_derivative(exp, z) * s[0] + s[1])
    tail = float(np.sum(np.abs(a) * tails)) + _truncation_estimate(exp, z, a, j)
    return np.array([w, dw, ddw], dtype=complex), tail


def _truncation_estimate(exp: BetaExpansion, z, a, j) -> float:
    try:
        rho = abs(ratio_limit(a))
    except (ParameterError, NoConvergence):
        rho = 1.0 / exp.radius if np.isfinite(exp.radius) else 0.0
    r = abs(z - exp.expansion_point) * max(rho, 1.0 / exp.radius if np.isfinite(exp.radius) else 0.0)
    last = abs(a[-1] * j[-1])
    return last * r / (1 - r) if r < 1 else float("inf")


def _apply_prefactor(exp: BetaExpansion, z, jet) -> np.ndarray:
    """Multiply a bracket jet by ``(z-a)^(-eps/2)`` when the transform is type 2."""
    if not exp.prefactor_epsilon_half:
        return np.asarray(jet, dtype=complex)
    w, dw, ddw = jet
    h = exp.params.epsilon / 2
    s = z - exp.params.a
    e = s ** (-h)
    return np.array([
        e * w,
        e * (dw - h / s * w),
        e * (ddw - 2 * h / s * dw + h * (h + 1) / s**2 * w),
    ])


def _check_point(exp: BetaExpansion, z) -> complex:
    z = complex(z)
    if abs(z.imag) > 1e-14:
        raise DomainError(f"expansions are evaluated on the real segment, got z={z}")
    lo, hi = exp.domain()
    slack = 1e-12
    if not (lo - slack <= z.real <= hi + slack):
        raise DomainError(f"z={z.real:.6g} outside the evaluation segment [{lo:.6g}, {hi:.6g}]")
    if z == exp.expansion_point:
        raise DomainError("evaluation exactly at the expansion point")
    return complex(z.real, 0.0)


def eval_expansion(exp: BetaExpansion, z):
    """``(u, u', u'', tail_bound)`` at a real ``z`` inside ``exp.domain()``."""
    z = _check_point(exp, z)
    jet, tail = _series_jet(exp, z)
    jet = jet + np.array([exp.c0, 0, 0])
    out = _apply_prefactor(exp, z, jet)
    if exp.prefactor_epsilon_half:
        tail *= abs((z - exp.params.a) ** (-exp.params.epsilon / 2))
    return complex(out[0]), complex(out[1]), complex(out[2]), float(tail)


def _c0_candidates(exp: BetaExpansion, count: int = 9) -> np.ndarray:
    lo, hi = exp.domain()
    pts = np.linspace(lo, hi, count + 2)[1:-1]
    return pts[np.abs(pts - exp.expansion_point) > 1e-3 * (hi - lo)]


def determine_c0(exp: BetaExpansion, test_points=None,
                 strict: bool = True) -> tuple[complex, C0Certificate]:
    """Solve the (linear in C0) Heun residual at two points.

    Returns the value together with a certificate; raises
    :class:`InconsistentC0` when the two determinations disagree by more
    than ``1e-8`` relative.
    """
    prm = exp.params
    if not np.any(exp.coeffs):
        return 1 + 0j, C0Certificate((0.0, 0.0), (1 + 0j, 1 + 0j), 0.0)
    basis_jet = np.array([1, 0, 0], dtype=complex)
    if test_points is None:
        cand = _c0_candidates(exp)
        rb = [abs(heun_residual(prm, *_apply_prefactor(exp, complex(z), basis_jet), z)) for z in cand]
        order = np.argsort(rb)[::-1]
        test_points = (float(cand[order[0]]), float(cand[order[1]]))
    vals, mags = [], []
    for z in test_points:
        zc = complex(z)
        sjet, _ = _series_jet(exp, zc)
        rs = heun_residual(prm, *_apply_prefactor(exp, zc, sjet), zc)
        rb = heun_residual(prm, *_apply_prefactor(exp, zc, basis_jet), zc)
        if rb == 0:
            raise InconsistentC0(f"C0 does not enter the residual at z={z}")
        vals.append(-rs / rb)
        mags.append(abs(sjet[0]))
    scale = max(abs(vals[0]), abs(vals[1]), *mags)
    rel = abs(vals[0] - vals[1]) / scale if scale else 0.0
    cert = C0Certificate(tuple(float(t) for t in test_points), (complex(vals[0]), complex(vals[1])), float(rel))
    if strict and rel > C0_RTOL:
        raise InconsistentC0(
            f"C0 determinations {vals[0]:.12g} and {vals[1]:.12g} disagree (rel {rel:.2e})"
        )
    return complex(vals[0]), cert


def expansion_residual(exp: BetaExpansion, z) -> complex:
    u, du, ddu, _ = eval_expansion(exp, z)
    return heun_residual(exp.params, u, du, ddu, z)


# -- oracle matching ---------------------------------------------------------


def matching_oracle(exp: BetaExpansion, n_terms: int = 300) -> OracleSolution:
    """Frobenius solution of the Heun equation spanning the same line as ``exp``.

    At ``0`` (resp. ``1``) the expansion behaves like ``c + z^(mu+1-gamma)``
    (resp. ``(z-1)^(mu+1-delta)``): exponent ``1`` maps to the analytic
    solution, anything else to the second exponent.  At an ordinary point of
    the Heun equation with ``mu = 2`` the derivative of ``w`` vanishes there,
    which fixes ``u'/u``.
    """
    prm, p, mu = exp.params, exp.expansion_point, exp.mu
    if p in (0, 1):
        e = mu + 1 - (prm.gamma if p == 0 else prm.delta)
        ex = 0 if abs(e - 1) < 1e-10 else e
        return heun_frobenius_oracle(prm, ex, n_terms, point=p)
    if any(abs(p - s) < 1e-12 for s in prm.singular_points()):
        raise ParameterError("no oracle pairing for expansions at z = a")
    if abs(mu - 2) > 1e-10:
        raise ParameterError(f"oracle pairing at an ordinary point needs mu = 2, got {mu}")
    slope = -prm.epsilon / (2 * (p - prm.a)) if exp.prefactor_epsilon_half else 0
    return heun_frobenius_oracle(prm, 0, n_terms, point=p, slope=slope)


@dataclass(frozen=True)
class Comparison:
    grid: np.ndarray
    values: np.ndarray
    reference: np.ndarray
    factor: complex
    deviations: np.ndarray
    residuals: np.ndarray
    tails: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))


def comparison_grid(exp: BetaExpansion, oracle: OracleSolution, count: int = 10,
                    start: float = 0.05) -> np.ndarray:
    lo, hi = exp.domain()
    lo2, hi2 = real_segment(oracle.point, EVAL_FRACTION * oracle.radius)
    lo, hi = max(lo, lo2, start), min(hi, hi2, 1 - start)
    if hi <= lo:
        raise UnsupportedDomain("expansion and oracle share no evaluation segment")
    return np.linspace(lo, hi, count)


def compare_with_oracle(exp: BetaExpansion, grid=None, oracle: OracleSolution | None = None,
                        n_oracle: int = 300) -> Comparison:
    """One-factor least-squares match of ``exp`` against its oracle on ``grid``."""
    oracle = oracle or matching_oracle(exp, n_oracle)
    grid = comparison_grid(exp, oracle) if grid is None else np.asarray(grid, dtype=float)
    vals, res, tails = [], [], []
    for z in grid:
        u, du, ddu, tb = eval_expansion(exp, z)
        vals.append(u)
        tails.append(tb)
        res.append(heun_residual(exp.params, u, du, ddu, z))
    ref = np.array([oracle(z) for z in grid])
    vals = np.array(vals)
    c, _ = normalized_deviation(vals, ref)
    dev = np.abs(vals - c * ref) / np.abs(c * ref)
    return Comparison(grid, vals, ref, c, dev, np.array(res), np.array(tails))
