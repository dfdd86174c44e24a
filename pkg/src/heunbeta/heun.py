"""General Heun equation: parameters, reference local solutions, residuals.

    u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u'
        + (alpha*beta*z - q) / (z (z-1) (z-a)) u = 0,

with ``1 + alpha + beta = gamma + delta + epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import (
    DegenerateZ0,
    EvaluationAtSingularity,
    ParameterError,
    SingularityCollision,
)
from .series import (
    ComplexPoly,
    FrobeniusSeries,
    RationalODE,
    build_recurrence,
    indicial_exponents,
    run_recurrence,
)

FUCHS_TOL = 1e-12


@dataclass(frozen=True)
class HeunParameters:
    a: complex
    q: complex
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    epsilon: complex

    def __post_init__(self):
        for name in ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.a) < 1e-14 or abs(self.a - 1) < 1e-14:
            raise SingularityCollision(f"a={self.a} collides with 0 or 1")
        defect = 1 + self.alpha + self.beta - self.gamma - self.delta - self.epsilon
        scale = max(1.0, abs(self.alpha), abs(self.beta), abs(self.gamma), abs(self.delta))
        if abs(defect) > FUCHS_TOL * scale:
            raise ParameterError(f"Fuchsian relation violated by {abs(defect):.3g}")

    @property
    def z0(self) -> complex:
        """Extra singular point ``q / (alpha*beta)`` of the derivative transform."""
        ab = self.alpha * self.beta
        if ab == 0:
            raise DegenerateZ0("alpha*beta = 0 leaves q/(alpha*beta) undefined")
        return self.q / ab

    def singular_points(self) -> tuple[complex, complex, complex]:
        return (0j, 1 + 0j, self.a)

    def replace(self, **changes) -> "HeunParameters":
        """Copy with some of ``a, q, alpha, beta, gamma, delta`` changed;
        ``epsilon`` is recomputed from the Fuchsian relation."""
        vals = dict(a=self.a, q=self.q, alpha=self.alpha, beta=self.beta,
                    gamma=self.gamma, delta=self.delta)
        vals.update(changes)
        return make_params(**vals)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon")}


def make_params(a, q, alpha, beta, gamma, delta, epsilon=None) -> HeunParameters:
    """Build parameters; ``epsilon`` defaults to the Fuchsian value."""
    if epsilon is None or (isinstance(epsilon, str) and epsilon == "auto"):
        epsilon = 1 + alpha + beta - gamma - delta
    return HeunParameters(a, q, alpha, beta, gamma, delta, epsilon)


def heun_ode(params: HeunParameters) -> RationalODE:
    """The Heun equation multiplied through by ``z (z-1) (z-a)``."""
    a, g, d, e = params.a, params.gamma, params.delta, params.epsilon
    z = ComplexPoly([0, 1])
    zm1 = ComplexPoly([-1, 1])
    zma = ComplexPoly([-a, 1])
    p2 = z * zm1 * zma
    p1 = g * (zm1 * zma) + d * (z * zma) + e * (z * zm1)
    p0 = ComplexPoly([-params.q, params.alpha * params.beta])
    return RationalODE(p2, p1, p0)


def heun_residual(params: HeunParameters, u, du, ddu, z) -> complex:
    """Left-hand side of the Heun equation for the jet ``(u, u', u'')`` at ``z``."""
    z = complex(z)
    for s in params.singular_points():
        if abs(z - s) < 1e-14:
            raise EvaluationAtSingularity(f"z={z} is a singular point")
    a = params.a
    P = params.gamma / z + params.delta / (z - 1) + params.epsilon / (z - a)
    Q = (params.alpha * params.beta * z - params.q) / (z * (z - 1) * (z - a))
    return ddu + P * du + Q * u


@dataclass(frozen=True)
class OracleSolution:
    """Frobenius solution of the Heun equation itself, used as ground truth."""

    params: HeunParameters
    point: complex
    exponent: complex
    series: FrobeniusSeries
    radius: float

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    @property
    def exponent_at_zero(self) -> complex:
        return self.exponent

    def jet(self, z, nderiv: int = 2) -> np.ndarray:
        return self.series.jet(z, nderiv)

    def __call__(self, z) -> complex:
        return self.series(z)


def local_radius(point: complex, singular_points) -> float:
    """Distance from ``point`` to the nearest singular point other than itself."""
    d = [abs(point - s) for s in singular_points if abs(point - s) > 1e-12]
    return min(d) if d else float("inf")


def heun_frobenius_oracle(
    params: HeunParameters,
    exponent: complex = 0,
    n_terms: int = 300,
    point: complex = 0,
    slope: complex = 0,
) -> OracleSolution:
    """Local Frobenius solution of the Heun equation at ``point``.

    At ``0`` the admissible exponents are ``0`` and ``1 - gamma``; at ``1``
    they are ``0`` and ``1 - delta``; at ``a``, ``0`` and ``1 - epsilon``.  At
    an ordinary point the exponent-0 branch needs the normalized slope
    ``u'(point)/u(point)``, given by ``slope``.  Coefficients are normalized
    to ``c_0 = 1``.
    """
    ode = heun_ode(params)
    point = complex(point)
    exps = indicial_exponents(ode, point)
    exponent = complex(exponent)
    if min(abs(exponent - e) for e in exps) > 1e-10:
        raise ParameterError(f"exponent {exponent} not in {exps} at z={point}")
    rec = build_recurrence(ode, point, exponent)
    ordinary = all(abs(point - s) > 1e-12 for s in params.singular_points())
    free = {1: slope} if ordinary and abs(exponent) < 1e-10 else None
    coeffs = run_recurrence(rec, n_terms, free=free)
    series = FrobeniusSeries(point, exponent, coeffs)
    return OracleSolution(params, point, exponent, series,
                          local_radius(point, params.singular_points()))


# -- jets --------------------------------------------------------------------


def jet_mul(f, g) -> np.ndarray:
    """Leibniz rule on derivative arrays ``[f, f', f'', ...]``."""
    n = min(len(f), len(g))
    return np.array(
        [sum(comb(k, j) * f[j] * g[k - j] for j in range(k + 1)) for k in range(n)],
        dtype=complex,
    )


def power_jet(z, center, s, nderiv: int) -> np.ndarray:
    """Derivatives of ``(z - center)**s`` (principal branch)."""
    t = complex(z) - center
    out = np.empty(nderiv + 1, dtype=complex)
    fall = 1 + 0j
    for k in range(nderiv + 1):
        if k:
            fall *= s - k + 1
        out[k] = fall * t ** (s - k) if fall != 0 else 0
    return out


def derivative_transform_jet(params: HeunParameters, kind: int, z, ujet) -> np.ndarray:
    """Jet ``(v, v', v'')`` of the derivative transform of a Heun solution.

    ``kind=1``: ``v = z^gamma (z-1)^delta u'``.
    ``kind=2``: ``v = z^gamma (z-1)^delta w'`` with ``w = (z-a)^(eps/2) u``.
    ``ujet`` must hold ``u`` and its first three derivatives.
    """
    ujet = np.asarray(ujet, dtype=complex)
    if len(ujet) < 4:
        raise ParameterError("need u, u', u'', u''' for the second derivative of v")
    if kind == 1:
        base = ujet
    elif kind == 2:
        base = jet_mul(power_jet(z, params.a, params.epsilon / 2, 3), ujet)
    else:
        raise ParameterError(f"unknown transform kind {kind}")
    m = jet_mul(power_jet(z, 0, params.gamma, 2), power_jet(z, 1, params.delta, 2))
    return jet_mul(m, base[1:4])


def normalized_deviation(values, reference) -> tuple[complex, float]:
    """Least-squares factor ``c`` with ``values ~ c * reference`` and the
    resulting maximum pointwise relative deviation."""
    v = np.asarray(values, dtype=complex)
    r = np.asarray(reference, dtype=complex)
    c = np.vdot(r, v) / np.vdot(r, r)
    dev = np.abs(v - c * r) / np.abs(c * r)
    return complex(c), float(np.max(dev))
