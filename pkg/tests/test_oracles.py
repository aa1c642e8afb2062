"""Self-checks of the exact-rational oracles against closed forms."""

from fractions import Fraction as F

from oracles import c_constant_enclosure, decimal_digits, jnu_enclosure, qpoch, qpoch_inf


def pentagonal(q: F, terms: int = 60) -> F:
    # Euler: (q;q)_inf = sum_k (-1)^k q^{k(3k-1)/2} over all integers k
    total = F(0)
    for k in range(-terms, terms + 1):
        total += (-1) ** (k % 2) * q ** (k * (3 * k - 1) // 2)
    return total


def test_qpoch_inf_matches_euler_pentagonal_series():
    q = F(1, 4)
    lo, hi = qpoch_inf(q, q)
    value = pentagonal(q)
    assert lo <= value <= hi
    assert hi - lo < F(1, 10**100)


def test_qpoch_finite_telescopes():
    a, b = F(2, 7), F(3, 5)
    assert qpoch(a, b, 5) == qpoch(a, b, 4) * (1 - a * b**4)


def test_c_constant_closed_forms():
    half = F(1, 2)
    lo, hi = c_constant_enclosure(half, half**2)
    assert lo <= 2 <= hi
    lo, hi = c_constant_enclosure(half, half**4)
    assert lo <= F(8, 3) <= hi


def test_jnu_enclosure_small_argument_is_near_one():
    q = F(1, 2)
    lo, hi = jnu_enclosure(q, q**2, q**80)
    assert 1 - F(1, 10**24) < lo <= hi < 1


def test_decimal_digits_rounds():
    assert decimal_digits(F(2, 3), 5) == "0.66667"
