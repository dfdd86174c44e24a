"""Complex polynomials and a generic Frobenius recurrence generator.

An ODE ``p2(z) v'' + p1(z) v' + p0(z) v = 0`` with polynomial coefficients is
shifted to a point ``z1``.  Substituting ``v = t**mu * sum(a_n t**n)`` with
``t = z - z1`` and collecting powers of ``t`` gives a linear recurrence

    sum_{j=0}^{k} C_j(n) a_{n-j} = 0,

whose coefficients ``C_j`` are polynomials of degree <= 2 in ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import IrregularSingularity, NoConvergence, ParameterError, Resonance

#: relative threshold under which shifted coefficients count as exact zeros
ZERO_TOL = 1e-12


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return np.zeros(0, dtype=complex)
    return arr[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    """Polynomial with complex coefficients stored in ascending degree.

    Trailing zeros are stripped, so the zero polynomial has no coefficients.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        self.coeffs.setflags(write=False)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "ComplexPoly":
        out = cls([lead])
        for r in roots:
            out = out * cls([-r, 1.0])
        return out

    @classmethod
    def coerce(cls, value) -> "ComplexPoly":
        return value if isinstance(value, ComplexPoly) else cls(value)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __getitem__(self, i: int) -> complex:
        if 0 <= i < len(self.coeffs):
            return complex(self.coeffs[i])
        return 0j

    def __call__(self, z):
        # Horner
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc if acc.ndim else complex(acc)

    def __add__(self, other):
        other = ComplexPoly.coerce(other)
        return ComplexPoly(npoly.polyadd(self._padded(), other._padded()))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-ComplexPoly.coerce(other))

    def __rsub__(self, other):
        return ComplexPoly.coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPoly(self.coeffs * other)
        other = ComplexPoly.coerce(other)
        if self.is_zero() or other.is_zero():
            return ComplexPoly([])
        return ComplexPoly(npoly.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def _padded(self) -> np.ndarray:
        return self.coeffs if len(self.coeffs) else np.zeros(1, dtype=complex)

    def deriv(self) -> "ComplexPoly":
        if self.degree < 1:
            return ComplexPoly([])
        return ComplexPoly(npoly.polyder(self.coeffs))

    def shift(self, z1: complex) -> "ComplexPoly":
        """Return ``t -> p(z1 + t)``."""
        out = ComplexPoly([])
        lin = ComplexPoly([z1, 1.0])
        for c in self.coeffs[::-1]:
            out = out * lin + ComplexPoly([c])
        return out

    def valuation(self, scale: float | None = None, tol: float = ZERO_TOL) -> int | float:
        """Index of the lowest coefficient that is not negligible.

        Coefficients with modulus below ``tol * scale`` are treated as zero;
        returns ``inf`` for the (numerically) zero polynomial.
        """
        if scale is None:
            scale = self.norm()
        for i, c in enumerate(self.coeffs):
            if abs(c) > tol * scale:
                return i
        return float("inf")

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def __repr__(self) -> str:
        return f"ComplexPoly({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True)
class RationalODE:
    """``p2 v'' + p1 v' + p0 v = 0`` in cleared (polynomial) form."""

    p2: ComplexPoly
    p1: ComplexPoly
    p0: ComplexPoly

    def __post_init__(self):
        for name in ("p2", "p1", "p0"):
            object.__setattr__(self, name, ComplexPoly.coerce(getattr(self, name)))
        if self.p2.is_zero():
            raise ParameterError("leading coefficient p2 must not be the zero polynomial")

    def residual(self, z, v, dv, ddv):
        """Residual of the monic form ``v'' + (p1/p2) v' + (p0/p2) v``."""
        p2 = self.p2(z)
        return ddv + (self.p1(z) / p2) * dv + (self.p0(z) / p2) * v

    def scale(self) -> float:
        return max(self.p2.norm(), self.p1.norm(), self.p0.norm())


def shift_to_origin(ode: RationalODE, z1: complex) -> RationalODE:
    """Change variable to ``t = z - z1``."""
    if z1 == 0:
        return ode
    return RationalODE(ode.p2.shift(z1), ode.p1.shift(z1), ode.p0.shift(z1))


def _local_structure(ode: RationalODE, z1: complex):
    """Shifted ODE and the common valuation offset ``m`` at ``z1``."""
    sh = shift_to_origin(ode, z1)
    scale = max(ode.scale(), 1.0) * max(1.0, abs(z1)) ** max(ode.p2.degree, 1)
    v2 = sh.p2.valuation(scale)
    v1 = sh.p1.valuation(scale)
    v0 = sh.p0.valuation(scale)
    m = min(v2, v1 + 1, v0 + 2)
    if v2 != m:
        raise IrregularSingularity(
            f"z={z1} is not a regular singular point (valuations {v2}, {v1}, {v0})"
        )
    return sh, int(m), (v2, v1, v0)


def indicial_exponents(ode: RationalODE, z1: complex) -> tuple[complex, complex]:
    """Roots of the indicial equation at ``z1``; ``(0, 1)`` at an ordinary point.

    Ordered by real part (then imaginary part), so the first is the "low"
    exponent.
    """
    sh, m, (v2, v1, v0) = _local_structure(ode, z1)
    if m == 0:
        return (0j, 1 + 0j)
    a2 = sh.p2[m]
    a1 = sh.p1[m - 1] if v1 == m - 1 else 0j
    a0 = sh.p0[m - 2] if v0 == m - 2 else 0j
    # a2 r(r-1) + a1 r + a0 = 0
    b = (a1 - a2) / a2
    c = a0 / a2
    disc = np.sqrt(complex(b * b - 4 * c))
    r1, r2 = (-b - disc) / 2, (-b + disc) / 2
    return tuple(sorted((complex(r1), complex(r2)), key=lambda r: (r.real, r.imag)))


@dataclass(frozen=True)
class RecurrenceRelation:
    """``sum_j C_j(n) a_{n-j} = 0`` with ``C_j`` polynomials in ``n``."""

    order: int
    coeff_polys: tuple[ComplexPoly, ...]
    exponent: complex
    point: complex = 0j

    def row(self, n: int) -> np.ndarray:
        """Numeric coefficients ``C_0(n), ..., C_k(n)``."""
        return np.array([c(n) for c in self.coeff_polys], dtype=complex)

    @property
    def n_terms(self) -> int:
        return self.order + 1


def build_recurrence(
    ode: RationalODE, z1: complex, mu: complex, offset: int | None = None
) -> RecurrenceRelation:
    """Recurrence for the Frobenius coefficients of ``ode`` at ``z1``.

    ``offset`` forces the power of ``t`` used to align the three coefficient
    polynomials (it may only be lowered below the natural valuation); the
    extra leading rows are then identically zero.  Trailing rows that vanish
    are dropped, so ``order`` is the true length of the relation.
    """
    sh, m, _ = _local_structure(ode, z1)
    if offset is not None:
        if offset > m:
            raise ParameterError(f"offset {offset} exceeds the natural valuation {m}")
        m = offset
    p2, p1, p0 = sh.p2, sh.p1, sh.p0
    kmax = max(p2.degree - m, p1.degree - m + 1, p0.degree - m + 2)

    rows = []
    for j in range(kmax + 1):
        s = mu - j
        # p2_{m+j} (n+s)(n+s-1) + p1_{m-1+j} (n+s) + p0_{m-2+j}
        c2, c1, c0 = p2[m + j], p1[m - 1 + j], p0[m - 2 + j]
        rows.append(
            ComplexPoly(
                [c2 * s * (s - 1) + c1 * s + c0, c2 * (2 * s - 1) + c1, c2]
            )
        )
    big = max(r.norm() for r in rows)
    order = kmax
    while order > 0 and rows[order].norm() <= ZERO_TOL * big:
        order -= 1
    return RecurrenceRelation(order, tuple(rows[: order + 1]), complex(mu), complex(z1))


def _poly_abs_scale(p: ComplexPoly, n: int) -> float:
    return sum(abs(c) * n**i for i, c in enumerate(p.coeffs))


def run_recurrence(
    rec: RecurrenceRelation,
    n_terms: int,
    free: Mapping[int, complex] | None = None,
    tol: float = ZERO_TOL,
) -> np.ndarray:
    """Forward substitution with ``a_0 = 1``; returns ``a_0 .. a_{n_terms}``.

    Raises :class:`Resonance` when ``C_0(n)`` vanishes for some ``n >= 1``.
    ``free`` supplies values for such indices; it is accepted only when the
    rest of the row vanishes too (no logarithmic obstruction).
    """
    lead = rec.coeff_polys[0]
    if abs(lead(0)) > tol * max(_poly_abs_scale(lead, 1), 1e-300):
        raise ParameterError(f"mu={rec.exponent} is not an indicial exponent (C_0(0) != 0)")
    free = dict(free or {})
    a = np.zeros(n_terms + 1, dtype=complex)
    a[0] = 1.0
    k = rec.order
    for n in range(1, n_terms + 1):
        row = rec.row(n)
        lo = max(0, n - k)
        # a_{n-1}, ..., a_{n-k} against C_1..C_k
        hist = a[n - 1 : lo - 1 : -1] if lo > 0 else a[n - 1 :: -1]
        rhs = -np.dot(row[1 : 1 + len(hist)], hist)
        scale = _poly_abs_scale(lead, n)
        if abs(row[0]) <= tol * scale:
            if n in free:
                ref = float(np.sum(np.abs(row))) * max(float(np.max(np.abs(hist))), 1.0)
                if abs(rhs) > 1e-8 * ref:
                    raise Resonance(n, f"logarithmic obstruction at n={n}")
                a[n] = free[n]
                continue
            raise Resonance(n)
        a[n] = rhs / row[0]
    return a


@dataclass(frozen=True)
class FrobeniusSeries:
    """``v(z) = (z - point)**exponent * sum(coeffs[n] (z - point)**n)``."""

    point: complex
    exponent: complex
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def power_sums(self, z: complex, nderiv: int = 2) -> np.ndarray:
        """Derivatives ``S^{(k)}(t)`` of the analytic part at ``t = z - point``."""
        t = complex(z) - self.point
        c = self.coeffs
        n = np.arange(len(c))
        out = np.empty(nderiv + 1, dtype=complex)
        fall = np.ones(len(c))
        for k in range(nderiv + 1):
            if k:
                fall = fall * (n - k + 1)
            idx = n >= k
            out[k] = np.sum(c[idx] * fall[idx] * t ** (n[idx] - k).astype(float))
        return out

    def jet(self, z: complex, nderiv: int = 2) -> np.ndarray:
        """``[v, v', ..., v^{(nderiv)}]`` at ``z`` (principal branch of the power)."""
        t = complex(z) - self.point
        mu = self.exponent
        s = self.power_sums(z, nderiv)
        out = np.zeros(nderiv + 1, dtype=complex)
        for k in range(nderiv + 1):
            acc = 0j
            fall = 1 + 0j
            for j in range(k + 1):
                if j:
                    fall *= mu - j + 1
                if fall == 0:
                    break
                acc += comb(k, j) * fall * t ** (mu - j) * s[k - j]
            out[k] = acc
        return out

    def __call__(self, z: complex) -> complex:
        return complex(self.jet(z, 0)[0])


def truncated_series_residual(
    ode: RationalODE, point: complex, mu: complex, coeffs: Sequence[complex]
) -> tuple[np.ndarray, int]:
    """Exact residual of a truncated Frobenius series.

    Returns ``(r, m)`` where ``t**(mu - 2) * sum(r[i] t**i)`` equals the left
    side of the shifted ODE applied to ``t**mu * sum(coeffs[n] t**n)``, and
    ``m`` is the local valuation offset.  Built by direct polynomial products,
    independently of :func:`build_recurrence`; for coefficients produced by
    :func:`run_recurrence` the entries ``r[:m + N + 1]`` vanish.
    """
    sh, m, _ = _local_structure(ode, point)
    c = np.asarray(coeffs, dtype=complex)
    n = np.arange(len(c))
    d2 = ComplexPoly(c * (n + mu) * (n + mu - 1))
    d1 = ComplexPoly(c * (n + mu))
    d0 = ComplexPoly(c)
    t = ComplexPoly([0, 1])
    total = sh.p2 * d2 + t * sh.p1 * d1 + t * t * sh.p0 * d0
    return total.coeffs, m


def ratio_limit(
    coeffs: Sequence[complex], window: int = 10, min_terms: int = 50, stability: float = 0.1
) -> complex:
    """Mean of the last ``window`` ratios ``a_n / a_{n-1}``.

    ``1/abs(result)`` estimates the convergence radius.  Raises
    :class:`NoConvergence` when the tail ratios are not stable to within
    ``stability`` in modulus (e.g. two dominant characteristic roots of
    equal modulus).
    """
    a = np.asarray(coeffs, dtype=complex)
    if len(a) < min_terms:
        raise ParameterError(f"need at least {min_terms} coefficients, got {len(a)}")
    tail = a[-(window + 1):]
    if np.any(tail == 0):
        raise NoConvergence("zero coefficients in the tail")
    ratios = tail[1:] / tail[:-1]
    mods = np.abs(ratios)
    mean = mods.mean()
    if mean == 0 or (mods.max() - mods.min()) > stability * mean:
        raise NoConvergence(f"tail ratios unstable: |r| in [{mods.min():.3g}, {mods.max():.3g}]")
    return complex(ratios.mean())
