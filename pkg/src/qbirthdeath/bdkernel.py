"""Transition kernel and semigroup of the bilateral birth-death chain on ``R_q``.

The chain jumps ``n -> n+1`` at rate ``lambda_n = q^{2nu-2n}`` and ``n -> n-1`` at
rate ``mu_n = q^{-2n}``. Its generator is the q-Bessel operator, so

    p_nr(t) = (1-q) q^{2(nu+1)n} c^2 int e^{-t y^2} j(q^n y) j(q^r y) y^{2nu+1} d_q y,

which on a window becomes ``w_n c^2 sum_k w_k e^{-t q^{2k}} J[n,k] J[r,k]`` with
``J[a,b] = j_nu(q^{a+b}, q^2)`` and ``w`` the Jackson measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .qcore import (
    GridFunction,
    GridWindow,
    QParams,
    WindowMismatch,
    inner_product,
    norm_p,
)
from .qbessel import conditioning_bits
from .qfourier import KernelMatrix, hankel_transform, translate

__all__ = [
    "TransitionRow",
    "HeatState",
    "birth_death_rates",
    "generator_apply",
    "generator_apply_tridiagonal",
    "heat_kernel",
    "density",
    "density_by_translation",
    "transition_row",
    "transition_matrix",
    "chapman_kolmogorov_defect",
    "semigroup_apply",
    "semigroup_apply_by_rows",
    "heat_residual",
    "stationary_weight",
    "self_adjoint_defect",
]


@dataclass(frozen=True)
class TransitionRow:
    """``p_nr(t)`` for all ``n`` in the window, from the fixed start ``q^r``."""

    r: int
    t: mpf
    window: GridWindow
    probs: tuple
    defect: mpf
    unique: bool
    params: QParams = field(repr=False)

    def __getitem__(self, n: int) -> mpf:
        return self.probs[self.window.index(n)]

    @property
    def total(self) -> mpf:
        return mpmath.fsum(self.probs)


@dataclass(frozen=True)
class HeatState:
    """The heat kernel ``rho_t = F[z -> e^{-t z^2}]`` sampled on the window."""

    t: mpf
    rho: GridFunction
    params: QParams


def birth_death_rates(n: int, params: QParams) -> tuple[mpf, mpf]:
    """``(lambda_n, mu_n) = (q^{2nu-2n}, q^{-2n})`` at working precision."""
    with params.workprec():
        return params.qpow(2 * params.nu - 2 * n), params.qpow(-2 * n)


def stationary_weight(n: int, params: QParams) -> mpf:
    """``pi_n = q^{2(nu+1)n}``, normalised so that ``pi_0 = 1``."""
    with params.workprec():
        return params.qpow(n * params.weight_exponent)


def _interior(f: GridFunction) -> GridWindow:
    if f.window.size < 3:
        raise ValueError(f"window {f.window} too small for the three-point operator")
    return f.window.shrink(1)


def _generator_bits(inner: GridWindow, params: QParams) -> int:
    return 16 + conditioning_bits(inner.n_hi, params)


def generator_apply(f: GridFunction) -> GridFunction:
    """``Delta_{q,nu} f(x) = [f(x/q) - (1 + q^{2nu}) f(x) + q^{2nu} f(qx)] / x^2`` on interior points.

    The difference is formed with extra bits to absorb the division by ``x^2``;
    the result is rounded to the working precision.
    """
    inner = _interior(f)
    p = f.params
    v = f.values
    out = []
    with p.workprec(_generator_bits(inner, p)):
        q2nu = p.qpow(2 * p.nu)
        for a, n in enumerate(inner, start=1):
            out.append((v[a - 1] - (1 + q2nu) * v[a] + q2nu * v[a + 1]) / p.qpow(2 * n))
    with p.workprec():
        return GridFunction(inner, tuple(+x for x in out), p)


def generator_apply_tridiagonal(f: GridFunction) -> GridFunction:
    """The same operator as ``mu_n f_{n-1} - (lambda_n + mu_n) f_n + lambda_n f_{n+1}``."""
    inner = _interior(f)
    p = f.params
    v = f.values
    out = []
    with p.workprec(_generator_bits(inner, p)):
        for a, n in enumerate(inner, start=1):
            lam, mu = p.qpow(2 * p.nu - 2 * n), p.qpow(-2 * n)
            out.append(mu * v[a - 1] - (lam + mu) * v[a] + lam * v[a + 1])
    with p.workprec():
        return GridFunction(inner, tuple(+x for x in out), p)


def _gaussian(t, M: KernelMatrix) -> list:
    p = M.params
    return [mpmath.exp(-t * p.qpow(2 * k)) for k in M.window]


def _positive_time(t) -> mpf:
    t = mpf(t)
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    return t


def heat_kernel(t, M: KernelMatrix) -> HeatState:
    """``rho_t = F[z -> e^{-t z^2}]``. ``t = 0`` is rejected: ``F[1]`` is not integrable."""
    p = M.params
    with p.workprec():
        t = _positive_time(t)
        g = GridFunction(M.window, tuple(_gaussian(t, M)), p)
        return HeatState(t, hankel_transform(g, M), p)


def _spectral_weights(t, M: KernelMatrix) -> list:
    return [wk * ek for wk, ek in zip(M.weights, _gaussian(t, M))]


def density(r: int, t, M: KernelMatrix) -> GridFunction:
    """``P_{x_r}(x, t) = c^2 int e^{-t y^2} j(xy) j(x_r y) y^{2nu+1} d_q y`` by direct summation."""
    p = M.params
    jr = M.bessel_row(r)
    with p.workprec():
        t = _positive_time(t)
        c2 = M.c * M.c
        h = [g * b for g, b in zip(_spectral_weights(t, M), jr)]
        return GridFunction(M.window, tuple(c2 * mpmath.fdot(h, row) for row in M.bessel), p)


def density_by_translation(r: int, t, M: KernelMatrix) -> GridFunction:
    """The same density as ``c T_{q, q^r} rho_t``."""
    rho = heat_kernel(t, M).rho
    with M.params.workprec():
        return translate(rho, r, M) * M.c


def transition_row(r: int, t, M: KernelMatrix) -> TransitionRow:
    """``p_nr(t) = (1-q) q^{2(nu+1)n} P_{x_r}(x_n, t)``; exactly the unit vector at ``t = 0``."""
    p = M.params
    M.window.index(r)
    with p.workprec():
        t = mpf(t)
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            probs = tuple(mpf(1) if n == r else mpf(0) for n in M.window)
        else:
            dens = density(r, t, M)
            probs = tuple(wn * d for wn, d in zip(M.weights, dens.values))
        defect = abs(1 - mpmath.fsum(probs))
    return TransitionRow(r, t, M.window, probs, defect, p.unique, p)


def transition_matrix(t, M: KernelMatrix) -> list:
    """``P[a][b] = p_{n_a, r_b}(t)`` for all pairs of window exponents."""
    p = M.params
    N = M.size
    with p.workprec():
        t = mpf(t)
        if t == 0:
            return [[mpf(1) if a == b else mpf(0) for b in range(N)] for a in range(N)]
        t = _positive_time(t)
        c2 = M.c * M.c
        g = _spectral_weights(t, M)
        # column b is computed exactly as transition_row(r_b, t) does, so the two agree bit for bit
        P = [[None] * N for _ in range(N)]
        for b in range(N):
            h = [gk * jk for gk, jk in zip(g, M.bessel[b])]
            for a in range(N):
                P[a][b] = M.weights[a] * (c2 * mpmath.fdot(h, M.bessel[a]))
        return P


def chapman_kolmogorov_defect(r: int, t, s, M: KernelMatrix, rows: GridWindow | None = None) -> mpf:
    """``max_n |p_nr(t+s) - sum_k p_nk(t) p_kr(s)|`` over ``rows`` (default: the whole window)."""
    p = M.params
    M.window.index(r)
    rows = rows or M.window
    with p.workprec():
        t = mpf(t)
        s = mpf(s)
        Pt = transition_matrix(t, M)
        col_s = transition_row(r, s, M).probs
        direct = transition_row(r, t + s, M).probs
        worst = mpf(0)
        for n in rows:
            a = M.window.index(n)
            composed = mpmath.fdot(Pt[a], col_s)
            worst = max(worst, abs(direct[a] - composed))
        return worst


def semigroup_apply(f: GridFunction, t, M: KernelMatrix) -> GridFunction:
    """``P_t f(x) = c int e^{-t y^2} F f(y) j(xy) y^{2nu+1} d_q y``; ``P_0 f = f``."""
    if f.window != M.window:
        raise WindowMismatch(f"function window {f.window} differs from kernel window {M.window}")
    p = M.params
    with p.workprec():
        t = mpf(t)
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return f
        ff = hankel_transform(f, M)
        damped = GridFunction(M.window, tuple(e * v for e, v in zip(_gaussian(t, M), ff.values)), p)
        return hankel_transform(damped, M)


def semigroup_apply_by_rows(f: GridFunction, t, M: KernelMatrix) -> GridFunction:
    """``P_t f(q^r) = sum_n p_nr(t) f(q^n)``, the expectation form."""
    if f.window != M.window:
        raise WindowMismatch(f"function window {f.window} differs from kernel window {M.window}")
    with M.params.workprec():
        P = transition_matrix(t, M)
        N = M.size
        vals = tuple(mpmath.fsum(P[a][b] * f.values[a] for a in range(N)) for b in range(N))
        return GridFunction(M.window, vals, M.params)


def heat_residual(f: GridFunction, t, M: KernelMatrix) -> mpf:
    """``max |d/dt P_t f - Delta P_t f|`` on interior points.

    With ``P_t f(q^n) = sum_m a_m j(q^{n+m})`` and ``a_m = c w_m e^{-t q^{2m}} F f(q^m)``
    the time derivative is taken under the sum (a factor ``-q^{2m}``), never by
    differencing in ``t``. Both syntheses run with the guard bits the operator needs.
    """
    p = M.params
    with p.workprec():
        t = _positive_time(t)
        ff = hankel_transform(f, M)
        coeffs = [M.c * g * v for g, v in zip(_spectral_weights(t, M), ff.values)]
    inner = M.window.shrink(1)
    with p.workprec(_generator_bits(inner, p)):
        u = tuple(mpmath.fdot(coeffs, row) for row in M.bessel)
        rate = [-p.qpow(2 * m) * a for m, a in zip(M.window, coeffs)]
        du = tuple(mpmath.fdot(rate, row) for row in M.bessel)
    lap_u = generator_apply(GridFunction(M.window, u, p))
    with p.workprec():
        return max(abs(a - b) for a, b in zip(du[1:-1], lap_u.values))


def self_adjoint_defect(f: GridFunction, g: GridFunction) -> mpf:
    """``|<Delta f, g> - <f, Delta g>|`` with both supported away from the window edges."""
    f._check(g)
    inner = _interior(f)
    for h in (f, g):
        edge = (h.values[0], h.values[1], h.values[-2], h.values[-1])
        if any(v != 0 for v in edge):
            raise ValueError("f and g must vanish on the two outermost points at each edge")
    lf = generator_apply(f)
    lg = generator_apply(g)
    with f.params.workprec():
        return abs(inner_product(lf, g.restrict(inner)) - inner_product(f.restrict(inner), lg))


def l2_distance(f: GridFunction, g: GridFunction) -> mpf:
    return norm_p(f - g, 2)
