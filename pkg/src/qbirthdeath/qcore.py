"""Parameters, the truncated geometric grid, q-shifted factorials and Jackson integrals.

Every quantity in this package lives on the grid ``R_q = {q**n}`` indexed by the
integer exponent ``n``. Arithmetic is done with :mod:`mpmath` at the working
precision carried by :class:`QParams`; the parameters themselves are stored as
exact rationals so that ``q = 0.4`` means exactly ``2/5`` at any precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import mpmath
from mpmath import mpf

__all__ = [
    "QParams",
    "GridWindow",
    "GridFunction",
    "make_params",
    "qpochhammer_finite",
    "qpochhammer_infinite",
    "c_constant",
    "jackson_integral",
    "inner_product",
    "norm_p",
    "measure_weights",
    "WindowMismatch",
    "default_window",
]

DEFAULT_PRECISION_BITS = 192
DEFAULT_TRUNC_TOL = 1e-40
DEFAULT_MAX_PRECISION_BITS = 1 << 15


class WindowMismatch(ValueError):
    """Two grid objects were combined over different exponent windows."""


def exact(value) -> Fraction:
    """Exact rational for a user-supplied number.

    Floats go through their shortest decimal repr, so ``0.4`` becomes ``2/5``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a number here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, mpf):
        man, exp = value.man_exp
        return Fraction(man) * Fraction(2) ** exp if exp >= 0 else Fraction(man, 2 ** -exp)
    return Fraction(str(value).strip())


def to_mpf(value: Fraction) -> mpf:
    """Correctly rounded mpf of a rational at the current precision."""
    return mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class QParams:
    """The pair ``(q, nu)`` plus the working-precision configuration."""

    q: Fraction
    nu: Fraction
    precision_bits: int = DEFAULT_PRECISION_BITS
    trunc_tol: float = DEFAULT_TRUNC_TOL
    max_precision_bits: int = DEFAULT_MAX_PRECISION_BITS

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"q out of range: need 0 < q < 1, got {float(self.q)}")
        if not self.nu > -1:
            raise ValueError(f"nu out of range: need nu > -1, got {float(self.nu)}")
        if self.precision_bits < 64:
            raise ValueError(f"precision_bits must be >= 64, got {self.precision_bits}")
        if not 0 < self.trunc_tol < 1:
            raise ValueError(f"trunc_tol must lie in (0, 1), got {self.trunc_tol}")
        if self.max_precision_bits < self.precision_bits:
            raise ValueError("max_precision_bits below precision_bits")

    def workprec(self, extra_bits: int = 0):
        return mpmath.workprec(self.precision_bits + extra_bits)

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def nuf(self) -> float:
        return float(self.nu)

    def q_mpf(self) -> mpf:
        return to_mpf(self.q)

    def qpow(self, exponent) -> mpf:
        """``q**exponent`` at the current precision; integer exponents are exact powers."""
        e = exact(exponent)
        qm = self.q_mpf()
        if e.denominator == 1:
            return qm ** int(e)
        return mpmath.power(qm, to_mpf(e))

    @property
    def weight_exponent(self) -> Fraction:
        """``2*nu + 2``: the power of ``t`` in ``t**(2nu+1) d_q t`` after the ``q**n`` step."""
        return 2 * self.nu + 2

    @property
    def unique(self) -> bool:
        """The minimal solution is the unique one exactly when ``nu >= 0``."""
        return self.nu >= 0

    @property
    def certified_digits(self) -> int:
        """Significant decimal digits the library vouches for."""
        bits_digits = int((self.precision_bits - 4) * math.log10(2))
        tol_digits = int(math.floor(-math.log10(self.trunc_tol)))
        return max(1, min(bits_digits, tol_digits))

    def as_dict(self) -> dict:
        return {
            "q": str(self.q),
            "nu": str(self.nu),
            "precision_bits": self.precision_bits,
            "trunc_tol": repr(self.trunc_tol),
            "max_precision_bits": self.max_precision_bits,
        }


def make_params(
    q,
    nu,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    trunc_tol: float = DEFAULT_TRUNC_TOL,
    max_precision_bits: int = DEFAULT_MAX_PRECISION_BITS,
) -> QParams:
    """Validated :class:`QParams`. ``q`` and ``nu`` are converted to exact rationals."""
    return QParams(
        exact(q),
        exact(nu),
        int(precision_bits),
        float(trunc_tol),
        max(int(max_precision_bits), int(precision_bits)),
    )


@dataclass(frozen=True)
class GridWindow:
    """Exponents ``n_lo..n_hi``; ``n_lo`` indexes the largest point ``q**n_lo``."""

    n_lo: int
    n_hi: int

    def __post_init__(self):
        if self.n_lo > self.n_hi:
            raise ValueError(f"empty window [{self.n_lo}, {self.n_hi}]")

    @classmethod
    def parse(cls, text: str) -> "GridWindow":
        lo, hi = text.split(":")
        return cls(int(lo), int(hi))

    @property
    def size(self) -> int:
        return self.n_hi - self.n_lo + 1

    def __len__(self) -> int:
        return self.size

    def __iter__(self):
        return iter(range(self.n_lo, self.n_hi + 1))

    def __contains__(self, n) -> bool:
        return self.n_lo <= n <= self.n_hi

    def index(self, n: int) -> int:
        if n not in self:
            raise IndexError(f"exponent {n} outside window [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def covers(self, other: "GridWindow") -> bool:
        return self.n_lo <= other.n_lo and other.n_hi <= self.n_hi

    def shrink(self, k: int = 1) -> "GridWindow":
        return GridWindow(self.n_lo + k, self.n_hi - k)

    def __str__(self) -> str:
        return f"{self.n_lo}:{self.n_hi}"


def default_window(params: QParams, n_lo: int = -12, n_hi: int = 48, tail_weight: float = 1e-28) -> GridWindow:
    """The ``[-12, 48]`` window, widened upward when the measure weight
    ``q**(n_hi*(2nu+2))`` at the top edge is still above ``tail_weight``."""
    rate = float(params.weight_exponent) * -math.log(params.qf)
    needed = math.ceil(-math.log(tail_weight) / rate)
    return GridWindow(n_lo, max(n_hi, needed))


@lru_cache(maxsize=64)
def measure_weights(params: QParams, window: GridWindow) -> tuple:
    """``(1-q) q**(n(2nu+2))`` per exponent: the Jackson measure of ``t**(2nu+1) d_q t``."""
    with params.workprec():
        one_minus_q = 1 - params.q_mpf()
        return tuple(one_minus_q * params.qpow(n * params.weight_exponent) for n in window)


@dataclass(frozen=True)
class GridFunction:
    """A real function on a window of ``R_q``; ``values[i]`` is ``f(q**(n_lo + i))``."""

    window: GridWindow
    values: tuple
    params: QParams = field(repr=False)

    def __post_init__(self):
        if len(self.values) != self.window.size:
            raise ValueError(f"{len(self.values)} values for a window of size {self.window.size}")
        if not all(mpmath.isfinite(v) for v in self.values):
            raise ValueError("grid function values must be finite")

    @classmethod
    def from_values(cls, window: GridWindow, values: Iterable, params: QParams) -> "GridFunction":
        with params.workprec():
            vals = tuple(mpf(v) if not isinstance(v, Fraction) else to_mpf(v) for v in values)
        return cls(window, vals, params)

    @classmethod
    def from_callable(cls, window: GridWindow, params: QParams, func: Callable[[int], object]) -> "GridFunction":
        """Sample ``func(n)`` at every exponent of the window."""
        with params.workprec():
            return cls.from_values(window, (func(n) for n in window), params)

    @classmethod
    def zeros(cls, window: GridWindow, params: QParams) -> "GridFunction":
        return cls(window, (mpf(0),) * window.size, params)

    @classmethod
    def constant(cls, window: GridWindow, params: QParams, value=1) -> "GridFunction":
        return cls.from_values(window, [value] * window.size, params)

    @classmethod
    def indicator(cls, window: GridWindow, params: QParams, n: int) -> "GridFunction":
        window.index(n)
        return cls.from_callable(window, params, lambda k: 1 if k == n else 0)

    def __getitem__(self, n: int) -> mpf:
        return self.values[self.window.index(n)]

    def items(self):
        return zip(self.window, self.values)

    def _check(self, other: "GridFunction"):
        if self.window != other.window:
            raise WindowMismatch(f"window mismatch: {self.window} vs {other.window}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        with self.params.workprec():
            return GridFunction(self.window, tuple(a + b for a, b in zip(self.values, other.values)), self.params)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        with self.params.workprec():
            return GridFunction(self.window, tuple(a - b for a, b in zip(self.values, other.values)), self.params)

    def __mul__(self, other) -> "GridFunction":
        with self.params.workprec():
            if isinstance(other, GridFunction):
                self._check(other)
                vals = tuple(a * b for a, b in zip(self.values, other.values))
            else:
                s = mpf(other)
                vals = tuple(s * a for a in self.values)
        return GridFunction(self.window, vals, self.params)

    __rmul__ = __mul__

    def restrict(self, window: GridWindow) -> "GridFunction":
        if not self.window.covers(window):
            raise WindowMismatch(f"{window} is not inside {self.window}")
        i0 = window.n_lo - self.window.n_lo
        return GridFunction(window, self.values[i0 : i0 + window.size], self.params)

    def extend(self, window: GridWindow) -> "GridFunction":
        """Zero-extend onto a larger window."""
        if not window.covers(self.window):
            raise WindowMismatch(f"{self.window} is not inside {window}")
        zero = mpf(0)
        return GridFunction(
            window,
            tuple(self[n] if n in self.window else zero for n in window),
            self.params,
        )

    def max_abs(self) -> mpf:
        return max(abs(v) for v in self.values)

    def support(self) -> list[int]:
        return [n for n, v in self.items() if v != 0]


def qpochhammer_finite(a, base, n: int) -> mpf:
    """``(a; base)_n = prod_{k<n} (1 - a base**k)``; equal to 1 for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a = mpf(a)
    base = mpf(base)
    prod = mpf(1)
    power = mpf(1)
    for _ in range(n):
        prod *= 1 - a * power
        power *= base
    return prod


def qpochhammer_infinite(a, base, params: QParams) -> mpf:
    """``(a; base)_inf`` truncated once the dropped tail is provably below ``trunc_tol``.

    With ``t_k = a base**k`` the dropped factors satisfy
    ``|log prod_{j>=k}(1 - t_j)| <= |t_k| / ((1 - base)(1 - |t_k|))``.
    """
    tol = params.trunc_tol
    with params.workprec():
        a = mpf(a)
        base = mpf(base)
        if not abs(base) < 1:
            raise ValueError("need |base| < 1")
        prod = mpf(1)
        term = a
        one_minus_b = 1 - abs(base)
        while True:
            at = abs(term)
            if at < tol and at < 0.5:
                tail = at / (one_minus_b * (1 - at))
                if mpmath.expm1(tail) < tol:
                    return prod
            prod *= 1 - term
            term *= base


@lru_cache(maxsize=64)
def c_constant(params: QParams) -> mpf:
    """``c_{q,nu} = (q^{2nu+2}; q^2)_inf / ((1-q) (q^2; q^2)_inf)``."""
    with params.workprec():
        q2 = params.qpow(2)
        num = qpochhammer_infinite(params.qpow(params.weight_exponent), q2, params)
        den = qpochhammer_infinite(q2, q2, params)
        return num / ((1 - params.q_mpf()) * den)


def jackson_integral(f: GridFunction) -> mpf:
    """``int_0^inf f(t) t^{2nu+1} d_q t`` restricted to the window of ``f``."""
    w = measure_weights(f.params, f.window)
    with f.params.workprec():
        return mpmath.fdot(w, f.values)


def inner_product(f: GridFunction, g: GridFunction) -> mpf:
    """``<f, g>_{q,nu}``."""
    f._check(g)
    w = measure_weights(f.params, f.window)
    with f.params.workprec():
        return mpmath.fsum(wi * a * b for wi, a, b in zip(w, f.values, g.values))


def norm_p(f: GridFunction, p=2) -> mpf:
    """``||f||_{q,p,nu}``; ``p = inf`` gives the sup norm over the window."""
    with f.params.workprec():
        if p == math.inf:
            return f.max_abs()
        p = mpf(p)
        if p < 1:
            raise ValueError("p must be >= 1")
        w = measure_weights(f.params, f.window)
        total = mpmath.fsum(wi * abs(v) ** p for wi, v in zip(w, f.values))
        if p == 2:
            return mpmath.sqrt(total)
        return total ** (1 / p)


def weighted_sum(weights: Sequence, values: Sequence) -> mpf:
    return mpmath.fdot(weights, values)
