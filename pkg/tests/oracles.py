"""Exact-rational reference computations, independent of mpmath and of the package.

Each oracle returns a rigorous enclosure ``(lo, hi)`` of Fractions.
"""

from fractions import Fraction


def qpoch(a: Fraction, base: Fraction, n: int) -> Fraction:
    prod = Fraction(1)
    for k in range(n):
        prod *= 1 - a * base**k
    return prod


def qpoch_inf(a: Fraction, base: Fraction, K: int = 200) -> tuple[Fraction, Fraction]:
    """Enclosure of ``(a; base)_inf`` for ``0 <= |a| < 1``, ``0 < base < 1``.

    The dropped factors satisfy ``prod_{k>=K}(1 - a b^k)`` in
    ``[1 - S, 1 + S + S^2]`` with ``S = |a| b^K / (1 - b)`` once ``S < 1/2``.
    """
    partial = qpoch(a, base, K)
    s = abs(a) * base**K / (1 - base)
    assert s < Fraction(1, 2)
    ends = (partial * (1 - s), partial * (1 + s + s * s))
    return min(ends), max(ends)


def jnu_enclosure(q: Fraction, a: Fraction, x2: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of ``sum_n (-1)^n q^{n(n+1)} x^{2n} / ((a; q^2)_n (q^2; q^2)_n)``.

    ``a = q^{2nu+2}`` must be rational. Summation stops past the peak term once
    the next term is below ``1e-80``; the alternating tail lies between 0 and
    the first omitted term.
    """
    q2 = q * q
    total = Fraction(1)
    term = Fraction(1)
    n = 0
    eps = Fraction(1, 10**80)
    while True:
        n += 1
        ratio = q2**n * x2 / ((1 - a * q2 ** (n - 1)) * (1 - q2**n))
        nxt = -term * ratio
        if ratio < 1 and abs(nxt) < eps:
            ends = (total, total + nxt)
            return min(ends), max(ends)
        term = nxt
        total += term


def c_constant_enclosure(q: Fraction, a: Fraction) -> tuple[Fraction, Fraction]:
    q2 = q * q
    nlo, nhi = qpoch_inf(a, q2)
    dlo, dhi = qpoch_inf(q2, q2)
    scale = 1 / (1 - q)
    return scale * nlo / dhi, scale * nhi / dlo


def decimal_digits(x: Fraction, digits: int = 45) -> str:
    """``x`` rounded to ``digits`` significant digits, as a decimal string."""
    from decimal import Decimal, getcontext

    getcontext().prec = digits
    return str(Decimal(x.numerator) / Decimal(x.denominator))
