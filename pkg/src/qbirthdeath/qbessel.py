"""The normalized q-Bessel function ``j_nu(x, q^2)`` on the grid.

The power series

    j_nu(x, q^2) = sum_n (-1)^n q^{n(n+1)} x^{2n} / ((q^{2nu+2}; q^2)_n (q^2; q^2)_n)

is summed directly. For large ``x`` the terms grow to a peak of size roughly
``q^{-m^2}`` (``x = q^{-m}``) before the result settles near ``q^{m^2}``, so the
working precision is raised by the log-ratio of the two before summing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpf

from .qcore import (
    GridWindow,
    QParams,
    c_constant,
    exact,
    measure_weights,
    qpochhammer_infinite,
    to_mpf,
)

__all__ = [
    "BesselGridCache",
    "PrecisionCapExceeded",
    "CacheCoverageError",
    "jnu_series",
    "jnu_at_exponent",
    "jnu_grid",
    "decay_bound",
    "delta_q",
    "orthogonality_defect",
    "escalated_bits",
    "conditioning_bits",
]

GUARD_BITS = 32


class PrecisionCapExceeded(ArithmeticError):
    """The argument is too large to sum within ``max_precision_bits``."""


class CacheCoverageError(LookupError):
    """A Bessel cache does not reach an exponent that a kernel needs."""


@lru_cache(maxsize=64)
def _bound_constant(params: QParams) -> mpf:
    # (-q^2;q^2)_inf (-q^{2nu+2};q^2)_inf / (q^{2nu+2};q^2)_inf
    with params.workprec():
        q2 = params.qpow(2)
        a = params.qpow(params.weight_exponent)
        return (
            qpochhammer_infinite(-q2, q2, params)
            * qpochhammer_infinite(-a, q2, params)
            / qpochhammer_infinite(a, q2, params)
        )


def decay_bound(n: int, params: QParams) -> mpf:
    """Upper bound on ``|j_nu(q^n, q^2)|``: constant for ``n >= 0``, ``~q^{n^2}`` below."""
    with params.workprec():
        b = _bound_constant(params)
        if n >= 0:
            return +b
        return b * params.qpow(n * n - (2 * params.nu + 1) * n)


def _log2_bound(m: float, params: QParams) -> float:
    """log2 of the decay bound at real exponent ``m`` (``x = q^m``)."""
    logb = math.log2(float(_bound_constant(params)))
    if m >= 0:
        return logb
    return logb + (m * m - (2 * params.nuf + 1) * m) * math.log2(params.qf)


def _log2_peak_term(m: float, params: QParams) -> float:
    """log2 of the largest series term at ``x = q^m``, by walking the term ratios in floats."""
    q = params.qf
    lq = math.log2(q)
    a = q ** float(params.weight_exponent)
    log_term = 0.0
    peak = 0.0
    n = 0
    while True:
        n += 1
        # |t_n / t_{n-1}| = q^{2n} x^2 / ((1 - q^{2nu+2n}) (1 - q^{2n}))
        step = (2 * n + 2 * m) * lq - math.log2(1 - a * q ** (2 * n - 2)) - math.log2(1 - q ** (2 * n))
        log_term += step
        peak = max(peak, log_term)
        if step < 0 and log_term < peak - 64:
            return peak


def escalated_bits(m: float, params: QParams) -> int:
    """Working precision for the series at ``x = q^m``.

    At least ``precision_bits + ceil(2 m^2 log2(1/q))`` for ``m < 0``, and at least
    enough to resolve the decay bound below the peak term.
    """
    bits = params.precision_bits + GUARD_BITS
    if m < 0:
        bits = max(bits, params.precision_bits + math.ceil(2 * m * m * math.log2(1 / params.qf)))
        cancel = _log2_peak_term(m, params) - _log2_bound(m, params)
        bits = max(bits, params.precision_bits + GUARD_BITS + math.ceil(cancel))
    return bits


def _sum_series(x2: mpf, params: QParams, stop: mpf) -> mpf:
    q2 = params.qpow(2)
    a = params.qpow(params.weight_exponent)
    total = mpf(1)
    term = mpf(1)
    q2n = mpf(1)
    a_q2n = a
    while True:
        q2n *= q2
        ratio = q2n * x2 / ((1 - a_q2n) * (1 - q2n))
        term *= -ratio
        total += term
        a_q2n *= q2
        # past the peak the terms shrink monotonically, so the remainder of the
        # alternating tail is below the first dropped term
        if ratio < 1 and abs(term) < stop:
            return total


def _stop_threshold(m: float, params: QParams, extra_bits: int) -> mpf:
    tol = min(mpf(params.trunc_tol), mpmath.ldexp(1, -(params.precision_bits + extra_bits)))
    return tol * mpmath.mpf(2) ** _log2_bound(m, params)


def _evaluate(x2_exact, m: float, params: QParams, extra_bits: int = 0) -> tuple[mpf, int]:
    bits = escalated_bits(m, params) + extra_bits
    if bits > params.max_precision_bits:
        raise PrecisionCapExceeded(
            f"argument q^{m:g} needs {bits} bits, cap is {params.max_precision_bits}"
        )
    with mpmath.workprec(bits):
        x2 = x2_exact()
        value = _sum_series(x2, params, _stop_threshold(m, params, extra_bits))
    with params.workprec(extra_bits):
        return +value, bits


def jnu_at_exponent(m, params: QParams, extra_bits: int = 0) -> tuple[mpf, int]:
    """``j_nu(q^m, q^2)`` and the bits used; ``q^m`` is formed at the escalated precision.

    ``extra_bits`` raises both the summation precision and the precision of the
    returned value above ``params.precision_bits``.
    """
    e = exact(m)
    return _evaluate(lambda: params.qpow(2 * e), float(e), params, extra_bits)


def jnu_series(x, params: QParams) -> mpf:
    """``j_nu(x, q^2)`` for real ``x > 0``.

    ``x`` is taken exactly: an :class:`mpf` as its binary value, floats through
    their decimal repr, strings and fractions as rationals.
    """
    xe = exact(x)
    if xe <= 0:
        raise ValueError("x must be positive")
    m = (math.log(xe.numerator) - math.log(xe.denominator)) / math.log(params.qf)
    x2 = xe * xe
    value, _ = _evaluate(lambda: to_mpf(x2), m, params)
    return value


def conditioning_bits(n: int, params: QParams) -> int:
    """Bits lost when a three-point difference at ``x = q^n`` is divided by ``x^2``."""
    if n <= 0:
        return 0
    return math.ceil(2 * n * math.log2(1 / params.qf))


@dataclass(frozen=True)
class BesselGridCache:
    """``j_nu(q^m, q^2)`` for every exponent ``m`` of ``window``."""

    params: QParams
    window: GridWindow
    values: tuple
    cert_bits: tuple

    def __getitem__(self, m: int) -> mpf:
        if m not in self.window:
            raise CacheCoverageError(f"exponent {m} outside Bessel cache {self.window}")
        return self.values[m - self.window.n_lo]

    def require(self, lo: int, hi: int) -> None:
        if not (self.window.n_lo <= lo and hi <= self.window.n_hi):
            raise CacheCoverageError(f"need Bessel exponents [{lo}, {hi}], cache has {self.window}")

    def row(self, shift: int, window: GridWindow) -> list:
        """``[j(q^{shift + n}) for n in window]``."""
        self.require(shift + window.n_lo, shift + window.n_hi)
        i0 = shift + window.n_lo - self.window.n_lo
        return list(self.values[i0 : i0 + window.size])


@lru_cache(maxsize=32)
def jnu_grid(window: GridWindow, params: QParams) -> BesselGridCache:
    """Evaluate and check ``j_nu`` on every exponent of ``window``.

    Values are kept with enough guard bits that the q-Bessel operator, which
    divides differences by ``x^2``, can be applied to them anywhere in the window.
    """
    extra = GUARD_BITS + conditioning_bits(window.n_hi, params)
    values = []
    bits = []
    for m in window:
        v, b = jnu_at_exponent(m, params, extra)
        with params.workprec():
            if abs(v) > decay_bound(m, params) * (1 + mpf("1e-6")):
                raise ArithmeticError(f"j_nu(q^{m}) = {v} violates the decay bound")
        values.append(v)
        bits.append(b)
    return BesselGridCache(params, window, tuple(values), tuple(bits))


def delta_q(i: int, j: int, params: QParams) -> mpf:
    """The grid delta ``delta_q(q^i, q^j)``: ``1/((1-q) q^{2(nu+1)i})`` on the diagonal, else 0."""
    with params.workprec():
        if i != j:
            return mpf(0)
        return 1 / ((1 - params.q_mpf()) * params.qpow(i * params.weight_exponent))


def orthogonality_defect(
    i: int,
    j: int,
    window: GridWindow,
    params: QParams,
    cache: BesselGridCache | None = None,
) -> mpf:
    """``|c^2 int j(q^i t) j(q^j t) t^{2nu+1} d_q t - delta_q(q^i, q^j)|`` with the integral over ``window``."""
    if cache is None:
        cache = jnu_grid(GridWindow(min(i, j) + window.n_lo, max(i, j) + window.n_hi), params)
    ji = cache.row(i, window)
    jj = cache.row(j, window)
    w = measure_weights(params, window)
    with params.workprec():
        c = c_constant(params)
        s = mpmath.fsum(wk * a * b for wk, a, b in zip(w, ji, jj))
        return abs(c * c * s - delta_q(i, j, params))
