from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from oracles import c_constant_enclosure, qpoch, qpoch_inf
from qbirthdeath.qcore import (
    GridFunction,
    GridWindow,
    WindowMismatch,
    c_constant,
    default_window,
    exact,
    inner_product,
    jackson_integral,
    make_params,
    measure_weights,
    norm_p,
    qpochhammer_finite,
    qpochhammer_infinite,
    to_mpf,
)
from qbirthdeath.qbessel import delta_q

# exact-rational oracle values (tests/oracles.py), 45 significant digits
QPOCH_QUARTER = "0.688537537120339715456514357293508184675549819"
C_Q06_NU05 = "3.34368473205673702793164184710439332002160117"

P = make_params(0.5, 0)
SMALL = GridWindow(-3, 5)


def rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- parameters


def test_make_params_accepts_defaults():
    p = make_params(0.5, 0.0, 192, 1e-40)
    assert p.q == Fraction(1, 2) and p.nu == 0 and p.precision_bits == 192


@pytest.mark.parametrize(
    "q, nu, message",
    [(1.2, 0.0, "q out of range"), (0.0, 0.0, "q out of range"), (0.5, -1.0, "nu out of range")],
)
def test_make_params_rejects(q, nu, message):
    with pytest.raises(ValueError, match=message):
        make_params(q, nu, 192, 1e-40)


@pytest.mark.parametrize("kwargs", [{"precision_bits": 32}, {"trunc_tol": 0.0}, {"trunc_tol": 1.5}])
def test_make_params_rejects_precision_settings(kwargs):
    with pytest.raises(ValueError):
        make_params(0.5, 0, **kwargs)


def test_decimal_parameters_are_exact():
    assert make_params(0.4, -0.5).q == Fraction(2, 5)
    assert make_params("1/3", "0.25").nu == Fraction(1, 4)
    assert exact(mpf(0.75)) == Fraction(3, 4)


def test_certified_digits_respects_tolerance():
    assert make_params(0.5, 0).certified_digits == 40
    assert make_params(0.5, 0, precision_bits=64).certified_digits == 18


def test_uniqueness_flag_follows_sign_of_nu():
    assert make_params(0.5, 0).unique
    assert not make_params(0.5, -0.25).unique


# ---------------------------------------------------------------- windows


def test_window_parse_and_shape():
    w = GridWindow.parse("-3:5")
    assert (w.n_lo, w.n_hi, w.size, str(w)) == (-3, 5, 9, "-3:5")
    assert w.index(-3) == 0 and 5 in w and 6 not in w
    with pytest.raises(IndexError):
        w.index(6)
    with pytest.raises(ValueError):
        GridWindow(2, 1)


def test_default_window_grows_for_slow_weights():
    assert default_window(make_params(0.5, 0)) == GridWindow(-12, 48)
    w = default_window(make_params(0.4, -0.5))
    assert w.n_lo == -12 and 0.4**w.n_hi <= 1e-28 < 0.4 ** (w.n_hi - 1)


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(SMALL, (mpf(1),), P)
    with pytest.raises(ValueError):
        GridFunction.from_values(SMALL, [1] * 8 + [mpmath.inf], P)
    f = GridFunction.zeros(SMALL, P)
    with pytest.raises(WindowMismatch):
        f + GridFunction.zeros(GridWindow(-3, 4), P)


def test_restrict_and_extend_roundtrip():
    f = GridFunction.from_callable(GridWindow(0, 2), P, lambda n: n + 1)
    g = f.extend(SMALL)
    assert g.support() == [0, 1, 2]
    assert g.restrict(GridWindow(0, 2)) == f


# ---------------------------------------------------------------- q-shifted factorials


def test_qpochhammer_finite_examples():
    with P.workprec():
        assert qpochhammer_finite(mpf("0.3"), mpf("0.7"), 0) == 1
        assert qpochhammer_finite(mpf("0.25"), mpf("0.25"), 1) == mpf("0.75")
        assert qpochhammer_finite(0, mpf("0.9"), 17) == 1


fractions = st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=64)


@given(a=fractions, b=st.fractions(min_value=Fraction(1, 64), max_value=Fraction(63, 64), max_denominator=64),
       n=st.integers(0, 30))
def test_qpochhammer_finite_recursion_and_oracle(a, b, n):
    with P.workprec():
        am, bm = to_mpf(a), to_mpf(b)
        left = qpochhammer_finite(am, bm, n + 1)
        right = qpochhammer_finite(am, bm, n) * (1 - am * bm**n)
        assert abs(left - right) <= mpf(2) ** -180 * (1 + abs(right))
        exact_value = qpoch(a, b, n + 1)
        assert abs(left - to_mpf(exact_value)) <= mpf(2) ** -170 * (1 + abs(to_mpf(exact_value)))


def test_qpochhammer_infinite_examples():
    with P.workprec():
        assert qpochhammer_infinite(0, mpf("0.25"), P) == 1
        value = qpochhammer_infinite(mpf("0.25"), mpf("0.25"), P)
        assert rel(value, mpf(QPOCH_QUARTER)) < 1e-40
    lo, hi = qpoch_inf(Fraction(1, 4), Fraction(1, 4))
    with P.workprec():
        assert to_mpf(lo) - mpf(10) ** -40 <= value <= to_mpf(hi) + mpf(10) ** -40


def test_qpochhammer_infinite_matches_long_finite_product():
    with P.workprec():
        a = mpf("0.25")
        inf = qpochhammer_infinite(a, a, P)
        fin = qpochhammer_finite(a, a, 200)
    assert abs(inf - fin) < P.trunc_tol


@given(a=fractions)
def test_qpochhammer_infinite_brackets_oracle(a):
    b = Fraction(1, 3)
    lo, hi = qpoch_inf(a, b, K=150)
    with P.workprec():
        v = qpochhammer_infinite(to_mpf(a), to_mpf(b), P)
        slack = mpf(10) ** -38
        assert to_mpf(lo) - slack <= v <= to_mpf(hi) + slack


# ---------------------------------------------------------------- normalising constant


def test_c_constant_closed_forms():
    with P.workprec():
        assert abs(c_constant(make_params(0.5, 0)) - 2) < mpf(10) ** -50
        assert abs(c_constant(make_params(0.5, 1)) - mpf(8) / 3) < mpf(10) ** -50


def test_c_constant_against_rational_oracle():
    p = make_params(0.6, 0.5)
    value = c_constant(p)
    assert value > 0
    q = Fraction(3, 5)
    lo, hi = c_constant_enclosure(q, q**3)
    with p.workprec():
        assert rel(value, mpf(C_Q06_NU05)) < 1e-40
        assert to_mpf(lo) * (1 - mpf(10) ** -40) <= value <= to_mpf(hi) * (1 + mpf(10) ** -40)


# ---------------------------------------------------------------- Jackson integral


def test_jackson_integral_examples():
    assert jackson_integral(GridFunction.indicator(SMALL, P, 0)) == mpf("0.5")
    assert jackson_integral(GridFunction.zeros(SMALL, P)) == 0


@pytest.mark.parametrize("x", [-2, 0, 3])
def test_jackson_integral_reproduces_against_delta(x):
    p = make_params(0.5, 1.5)
    f = GridFunction.from_callable(SMALL, p, lambda n: mpf(n) ** 2 - mpf(1) / 3)
    d = GridFunction.from_callable(SMALL, p, lambda n: delta_q(x, n, p))
    with p.workprec():
        assert abs(jackson_integral(f * d) - f[x]) < mpf(2) ** -180 * (1 + abs(f[x]))


def test_measure_weights_values():
    w = measure_weights(P, GridWindow(-1, 1))
    assert w == (mpf(2), mpf("0.5"), mpf("0.125"))


def test_inner_product_examples():
    e0 = GridFunction.indicator(SMALL, P, 0)
    assert inner_product(e0, e0) == mpf("0.5")


values = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=SMALL.size, max_size=SMALL.size)


@given(a=values, b=values, alpha=st.floats(-10, 10), beta=st.floats(-10, 10))
def test_linearity_symmetry_and_norm(a, b, alpha, beta):
    f = GridFunction.from_values(SMALL, a, P)
    g = GridFunction.from_values(SMALL, b, P)
    with P.workprec():
        combo = jackson_integral(f * alpha + g * beta)
        split = alpha * jackson_integral(f) + beta * jackson_integral(g)
        scale = 1 + abs(alpha) * norm_p(f, 1) + abs(beta) * norm_p(g, 1)
        assert abs(combo - split) <= mpf(2) ** -180 * scale
        assert inner_product(f, g) == inner_product(g, f)
        assert abs(norm_p(f, 2) ** 2 - inner_product(f, f)) <= mpf(2) ** -180 * (1 + inner_product(f, f))
        assert inner_product(f, f) >= 0


def test_norm_p_variants():
    f = GridFunction.from_values(SMALL, [0, 0, -3, 1, 0, 0, 0, 0, 0], P)
    with P.workprec():
        assert norm_p(f, mpmath.inf) == 3
        assert norm_p(f, 1) == 3 * 2 + mpf("0.5")
    with pytest.raises(ValueError):
        norm_p(f, 0.5)


def test_bit_identical_reruns():
    p1 = make_params(0.6, 0.5)
    p2 = make_params(0.6, 0.5)
    c_constant.cache_clear()
    a = c_constant(p1)
    c_constant.cache_clear()
    b = c_constant(p2)
    assert a == b and a.man_exp == b.man_exp
