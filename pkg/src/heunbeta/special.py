"""Gauss 2F1, the unnormalized incomplete Beta function and Appell F1.

All evaluators return a :class:`SeriesValue` carrying a truncation estimate.
The batch helpers at the bottom evaluate whole families of terms that share
every parameter except one shifted index; they are what the expansion code
uses on its inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, PoleAtC

RTOL = 1e-16
MAX_TERMS = 10000


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    terms_used: int
    tail_bound: float

    def __complex__(self):
        return complex(self.value)


def _is_nonpos_int(x: complex, tol: float = 1e-14) -> bool:
    x = complex(x)
    return abs(x.imag) < tol and x.real < 0.5 and abs(x.real - round(x.real)) < tol


def _is_zero(x: complex, tol: float = 1e-14) -> bool:
    return abs(complex(x)) < tol


def gauss_2f1(a, b, c, z, max_terms: int = MAX_TERMS, rtol: float = RTOL) -> SeriesValue:
    """Gauss hypergeometric series ``sum (a)_m (b)_m / ((c)_m m!) z^m``.

    Requires ``|z| < 1`` unless the series terminates (``a`` or ``b`` a
    nonpositive integer).
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    terminating = _is_nonpos_int(a) or _is_nonpos_int(b)
    if abs(z) >= 1 and not terminating:
        raise NoConvergence(f"2F1 series diverges for |z|={abs(z):.6g}")
    if z == 0:
        return SeriesValue(1 + 0j, 1, 0.0)
    total = 1 + 0j
    term = 1 + 0j
    ratio = 0.0
    for m in range(max_terms):
        if _is_zero(a + m) or _is_zero(b + m):
            return SeriesValue(total, m + 1, 0.0)
        if _is_zero(c + m):
            raise PoleAtC(f"c + {m} = {c + m} is a nonpositive integer")
        step = (a + m) * (b + m) / ((c + m) * (m + 1)) * z
        term *= step
        total += term
        ratio = abs(step)
        if abs(term) < rtol * abs(total) and ratio < 1:
            break
    # step ratios tend to |z|; the larger of the two bounds the remaining steps
    r = max(ratio, abs(z))
    tail = abs(term) * r / (1 - r) if r < 1 else float("inf")
    return SeriesValue(total, m + 2, tail)


def incomplete_beta(p, q, z) -> SeriesValue:
    """``B(p, q; z) = int_0^z t^(p-1) (1-t)^(q-1) dt`` (not normalized).

    Uses ``z^p / p * 2F1(p, 1-q; p+1; z)`` on the principal branch.  Complex
    ``z`` inside the unit disk is accepted; ``Re(p) > 0`` is required.
    """
    p, q, z = complex(p), complex(q), complex(z)
    if p.real <= 0:
        raise DomainError(f"incomplete Beta needs Re(p) > 0, got p={p}")
    if abs(z) >= 1:
        raise DomainError(f"incomplete Beta evaluated only for |z| < 1, got z={z}")
    if z == 0:
        return SeriesValue(0j, 1, 0.0)
    f = gauss_2f1(p, 1 - q, p + 1, z)
    pref = z**p / p
    return SeriesValue(pref * f.value, f.terms_used, abs(pref) * f.tail_bound)


def appell_f1(a, b1, b2, c, x, y, max_terms: int = MAX_TERMS, rtol: float = RTOL) -> SeriesValue:
    """Appell's first double series

        F1(a; b1, b2; c; x, y) = sum_{m,s} (a)_{m+s} (b1)_m (b2)_s
                                          / ((c)_{m+s} m! s!) x^m y^s.

    Summed as ``sum_s (a)_s (b2)_s / ((c)_s s!) y^s 2F1(a+s, b1; c+s; x)``;
    the outer sum stops adaptively (or exactly, if ``b2`` is a nonpositive
    integer), each inner 2F1 to its own tolerance.
    """
    a, b1, b2, c, x, y = (complex(v) for v in (a, b1, b2, c, x, y))
    y_term = _is_nonpos_int(b2) or y == 0
    x_term = _is_nonpos_int(b1) or x == 0
    if abs(x) >= 1 and not x_term:
        raise NoConvergence(f"F1 diverges in x for |x|={abs(x):.6g}")
    if abs(y) >= 1 and not y_term:
        raise NoConvergence(f"F1 diverges in y for |y|={abs(y):.6g}")
    total = 0j
    coef = 1 + 0j
    tails = 0.0
    used = 0
    last = 0.0
    ratio = 0.0
    for s in range(max_terms):
        inner = gauss_2f1(a + s, b1, c + s, x, max_terms, rtol)
        shell = coef * inner.value
        total += shell
        tails += abs(coef) * inner.tail_bound
        used += inner.terms_used
        last = abs(shell)
        if y == 0 or _is_zero(a + s) or _is_zero(b2 + s):
            return SeriesValue(total, used, tails)
        if _is_zero(c + s):
            raise PoleAtC(f"c + {s} = {c + s} is a nonpositive integer")
        step = (a + s) * (b2 + s) / ((c + s) * (s + 1)) * y
        coef *= step
        ratio = abs(step)
        if last < rtol * abs(total) and ratio < 1 and s > 0:
            break
    r = ratio if ratio < 1 else abs(y)
    y_tail = last * r / (1 - r) if r < 1 else float("inf")
    return SeriesValue(total, used, tails + y_tail)


# -- batch evaluators --------------------------------------------------------


def _shell_sums(e: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """``sum_k e[k] / (shifts[n] + k)`` for every ``n``."""
    k = np.arange(len(e))
    return (1.0 / (shifts[:, None] + k[None, :])) @ e


def _binomial_series(b: complex, x: complex, rtol: float, max_terms: int):
    """Coefficients ``(b)_k x^k / k!`` of ``(1 - x)^(-b)``, truncated."""
    out = [1 + 0j]
    term = 1 + 0j
    big = 1.0
    for k in range(max_terms):
        term = term * (b + k) / (k + 1) * x
        out.append(term)
        big = max(big, abs(term))
        if term == 0:
            break
        if abs(term) < rtol * big and abs((b + k + 1) / (k + 2) * x) < 1:
            break
    return np.array(out)


def beta_scaled_batch(p, q, x, rtol: float = RTOL, max_terms: int = MAX_TERMS):
    """``B(p_n, q; x) / x^(p_n)`` for an array of first parameters ``p_n``.

    The power ``x^(p_n)`` is left to the caller so branch choices stay
    consistent with the surrounding expression.  Returns ``(values, tail)``
    where ``tail`` bounds the truncation error of each entry.
    """
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    if np.any(p.real <= 0):
        raise DomainError("incomplete Beta needs Re(p) > 0")
    x = complex(x)
    if abs(x) >= 1:
        raise DomainError(f"incomplete Beta evaluated only for |x| < 1, got {x}")
    e = _binomial_series(1 - complex(q), x, rtol, max_terms)
    vals = _shell_sums(e, p)
    tail = _tail(e, x, p)
    return vals, tail


def appell_f1_batch(a, b1, b2, x, y, rtol: float = RTOL, max_terms: int = MAX_TERMS):
    """``F1(a_n; b1, b2; a_n + 1; x, y)`` for an array of ``a_n``.

    With ``c = a + 1`` the double series collapses along the shells
    ``m + s = k`` to ``sum_k a/(a+k) e_k`` where ``e_k`` is the Cauchy product
    of the binomial series of ``(1-x)^(-b1)`` and ``(1-y)^(-b2)``.  Returns
    ``(values, tail)``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    x, y = complex(x), complex(y)
    if abs(x) >= 1 or abs(y) >= 1:
        raise NoConvergence(f"F1 batch needs |x|, |y| < 1, got {abs(x):.6g}, {abs(y):.6g}")
    ex = _binomial_series(b1, x, rtol, max_terms)
    ey = _binomial_series(b2, y, rtol, max_terms)
    e = np.convolve(ex, ey)[: max(len(ex), len(ey))]
    for n_pole in a:
        if _is_nonpos_int(n_pole):
            raise PoleAtC(f"a = {n_pole} with c = a + 1 hits a pole")
    vals = a * _shell_sums(e, a)
    tail = np.abs(a) * _tail(e, max(abs(x), abs(y)), a)
    return vals, tail


def _tail(e: np.ndarray, r, shifts: np.ndarray) -> np.ndarray:
    r = abs(r)
    last = abs(e[-1])
    k = len(e) - 1
    geo = r / (1 - r) if r < 1 else float("inf")
    return last * geo / np.maximum(np.abs(shifts + k), 1e-300)
