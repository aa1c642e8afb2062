"""The q-Bessel Fourier transform on a grid window, translation, positivity and convolution.

On a window ``W`` of exponents the transform is the dense matrix

    (F f)(q^m) = c sum_{n in W} (1-q) q^{n(2nu+2)} f(q^n) j_nu(q^{m+n}, q^2),

whose Bessel factor depends on ``m + n`` only. Everything else here is built from
it: translation is ``F (Ff * j(q^i .))``, convolution is ``F (Ff * Fg)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import mpf

from .config import DEFAULT_PROBE_INDICES, DEFAULT_TOLERANCES
from .qbessel import BesselGridCache, decay_bound, jnu_grid
from .qcore import (
    GridFunction,
    GridWindow,
    QParams,
    WindowMismatch,
    c_constant,
    measure_weights,
)

__all__ = [
    "KernelMatrix",
    "TranslationKernel",
    "ProbeReport",
    "transform_matrix",
    "hankel_transform",
    "translate",
    "translation_kernel",
    "truncation_bound",
    "inversion_error_bound",
    "safe_support",
    "positivity_probe",
    "convolve",
    "convolve_by_translation",
]


@dataclass(frozen=True)
class KernelMatrix:
    """The transform on ``window``: ``entries[m][n] = c (1-q) q^{n(2nu+2)} j(q^{m+n})``.

    Rows and columns are positions ``n - window.n_lo``. ``bessel[a][b]`` holds the
    bare ``j(q^{a+b})`` and ``weights`` the Jackson measure, which the heat
    kernel routines reuse.
    """

    window: GridWindow
    entries: tuple
    params: QParams
    cache: BesselGridCache
    c: mpf
    weights: tuple
    bessel: tuple

    @property
    def size(self) -> int:
        return self.window.size

    def symmetrized(self) -> list:
        """``c (1-q) q^{(m+n)(nu+1)} j(q^{m+n})``: the measure-balanced form, symmetric in ``m, n``."""
        p = self.params
        with p.workprec():
            scale = self.c * (1 - p.q_mpf())
            half = [p.qpow(n * (p.nu + 1)) for n in self.window]
            # half[a] * half[b] first: a single commutative product keeps the result exactly symmetric
            return [
                [scale * (half[a] * half[b]) * self.bessel[a][b] for b in range(self.size)]
                for a in range(self.size)
            ]

    def bessel_row(self, shift: int) -> list:
        """``[j(q^{shift + k}) for k in window]``."""
        return self.cache.row(shift, self.window)


def transform_matrix(
    window: GridWindow, params: QParams, cache: BesselGridCache | None = None
) -> KernelMatrix:
    """Dense transform matrix; the Bessel cache must span exponents ``[2 n_lo, 2 n_hi]``."""
    if cache is None:
        cache = jnu_grid(GridWindow(2 * window.n_lo, 2 * window.n_hi), params)
    cache.require(2 * window.n_lo, 2 * window.n_hi)
    w = measure_weights(params, window)
    bessel = tuple(tuple(cache.row(m, window)) for m in window)
    with params.workprec():
        c = c_constant(params)
        entries = tuple(tuple(c * wn * jb for wn, jb in zip(w, row)) for row in bessel)
    return KernelMatrix(window, entries, params, cache, c, w, bessel)


def _check_window(f: GridFunction, M: KernelMatrix) -> None:
    if f.window != M.window:
        raise WindowMismatch(f"function window {f.window} differs from kernel window {M.window}")


def _matvec(rows: Sequence, values: Sequence) -> tuple:
    return tuple(mpmath.fdot(row, values) for row in rows)


def hankel_transform(f: GridFunction, M: KernelMatrix) -> GridFunction:
    """``F_{q,nu} f`` on the kernel window."""
    _check_window(f, M)
    with M.params.workprec():
        return GridFunction(M.window, _matvec(M.entries, f.values), M.params)


def translate(f: GridFunction, i: int, M: KernelMatrix) -> GridFunction:
    """``T_{q, q^i} f = F[F f * j(q^i .)]``."""
    _check_window(f, M)
    ji = M.bessel_row(i)
    with M.params.workprec():
        ff = _matvec(M.entries, f.values)
        g = tuple(a * b for a, b in zip(ff, ji))
        return GridFunction(M.window, _matvec(M.entries, g), M.params)


def convolve(f: GridFunction, g: GridFunction, M: KernelMatrix) -> GridFunction:
    """``f *_q g = F[F f * F g]``."""
    _check_window(f, M)
    _check_window(g, M)
    with M.params.workprec():
        ff = _matvec(M.entries, f.values)
        fg = _matvec(M.entries, g.values)
        prod = tuple(a * b for a, b in zip(ff, fg))
        return GridFunction(M.window, _matvec(M.entries, prod), M.params)


def convolve_by_translation(f: GridFunction, g: GridFunction, M: KernelMatrix) -> GridFunction:
    """``(f *_q g)(x) = c int T_{q,x} f(y) g(y) y^{2nu+1} d_q y`` evaluated pointwise."""
    _check_window(f, M)
    _check_window(g, M)
    out = []
    with M.params.workprec():
        wg = [wn * gn for wn, gn in zip(M.weights, g.values)]
        for m in M.window:
            tf = translate(f, m, M)
            out.append(M.c * mpmath.fdot(tf.values, wg))
        return GridFunction(M.window, tuple(out), M.params)


@dataclass(frozen=True)
class TranslationKernel:
    """``(T_{q,q^i} f)(q^m) = sum_n entries[m][n] f(q^n) (1-q) q^{n(2nu+2)}``.

    ``tail_bound[m][n]`` bounds the part of the entry lost to the window
    truncation, from the decay estimate of ``j_nu``.
    """

    base_index: int
    window: GridWindow
    entries: tuple
    tail_bound: tuple
    params: QParams

    def row_mass(self, m: int) -> mpf:
        a = self.window.index(m)
        w = measure_weights(self.params, self.window)
        with self.params.workprec():
            return mpmath.fdot(self.entries[a], w)


def _log2_bounds(params: QParams, lo: int, hi: int) -> dict:
    return {a: math.log2(decay_bound(a, params)) for a in range(lo, hi + 1)}


def _tail_bound_log2(indices, window: GridWindow, params: QParams, logb: dict, logw) -> float:
    """log2 of ``c^2 sum_{k outside window} w_k prod_a |j(q^{a+k})|`` via the decay bound."""
    terms = []
    # below the window: the Gaussian-like decay of j in (a+k) wins over the growing weight
    k = window.n_lo - 1
    while True:
        lt = logw(k) + sum(_log2_bound_at(a + k, params, logb) for a in indices)
        terms.append(lt)
        if len(terms) > 2 and lt < max(terms) - 80 and lt < terms[-2]:
            break
        k -= 1
    # above the window every factor is at most the constant bound and w_k is geometric
    ratio = float(params.weight_exponent) * math.log2(params.qf)
    upper = logw(window.n_hi + 1) + sum(_log2_bound_at(a + window.n_hi + 1, params, logb) for a in indices)
    upper -= math.log2(1 - 2.0**ratio)
    terms.append(upper)
    top = max(terms)
    return top + math.log2(sum(2.0 ** (t - top) for t in terms))


def _log2_bound_at(n: int, params: QParams, logb: dict) -> float:
    if n in logb:
        return logb[n]
    b0 = logb.setdefault(0, math.log2(decay_bound(0, params)))
    if n >= 0:
        return b0
    return b0 + (n * n - (2 * params.nuf + 1) * n) * math.log2(params.qf)


def truncation_bound(indices: Sequence[int], M: KernelMatrix) -> float:
    """Bound on ``c^2 sum_{k outside window} w_k prod_a |j(q^{a+k})|`` for exponents ``indices``.

    For two indices this is the truncation error of the orthogonality integral.
    """
    p = M.params
    lq = math.log2(p.qf)
    w_exp = float(p.weight_exponent)
    log_c2 = 2 * math.log2(float(M.c)) + math.log2(1 - p.qf)
    return 2.0 ** (log_c2 + _tail_bound_log2(tuple(indices), M.window, p, {}, lambda k: k * w_exp * lq))


def inversion_error_bound(n: int, M: KernelMatrix) -> float:
    """Bound on ``||F^2 e_n - e_n|| / ||e_n||`` for the grid indicator ``e_n``, from truncation alone."""
    w = [float(x) for x in M.weights]
    wn = w[M.window.index(n)]
    total = sum(wa * (wn * truncation_bound((a, n), M)) ** 2 for a, wa in zip(M.window, w))
    return math.sqrt(total / wn)


def safe_support(M: KernelMatrix, tol: float, margin: float = 1e-3) -> GridWindow | None:
    """Largest ``[n_lo + 1, n]`` on which every indicator satisfies ``F^2 e = e`` to ``margin * tol``.

    Functions supported there are reproduced by the truncated transform; ``None``
    when no such range exists.
    """
    lo = M.window.n_lo + 1
    hi = None
    for n in range(lo, M.window.n_hi):
        if inversion_error_bound(n, M) > margin * tol:
            break
        hi = n
    return None if hi is None else GridWindow(lo, hi)


def translation_kernel(i: int, M: KernelMatrix) -> TranslationKernel:
    """``t_i(m, n) = c^2 sum_k w_k j(q^{n+k}) j(q^{m+k}) j(q^{i+k})`` over the window."""
    p = M.params
    ji = M.bessel_row(i)
    N = M.size
    logb: dict = {}
    w_exp = float(p.weight_exponent)
    lq = math.log2(p.qf)
    log_c2 = 2 * math.log2(float(M.c)) + math.log2(1 - p.qf)

    def logw(k):
        return k * w_exp * lq

    entries = [[None] * N for _ in range(N)]
    tails = [[0.0] * N for _ in range(N)]
    with p.workprec():
        c2 = M.c * M.c
        for a in range(N):
            h = [wk * jk * jm for wk, jk, jm in zip(M.weights, ji, M.bessel[a])]
            for b in range(a, N):
                v = c2 * mpmath.fdot(h, M.bessel[b])
                entries[a][b] = entries[b][a] = v
        for a, m in enumerate(M.window):
            for b in range(a, N):
                n = M.window.n_lo + b
                t = 2.0 ** (log_c2 + _tail_bound_log2((i, m, n), M.window, p, logb, logw))
                tails[a][b] = tails[b][a] = t
    return TranslationKernel(
        i, M.window, tuple(tuple(r) for r in entries), tuple(tuple(r) for r in tails), p
    )


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of a positivity probe; a pass is evidence on the probed window only.

    ``min_relative`` covers certified entries, ``raw_min_relative`` all of them.
    A probe with no certified entry is inconclusive and does not pass.
    """

    passed: bool
    violation: tuple | None
    checked: int
    uncertified: int
    min_relative: float
    probe_indices: tuple
    raw_min_relative: float = math.inf

    @property
    def conclusive(self) -> bool:
        return self.violation is not None or self.checked > 0

    def as_dict(self) -> dict:
        v = None
        if self.violation is not None:
            i, m, n, value = self.violation
            v = {"i": i, "m": m, "n": n, "value": mpmath.nstr(value, 20)}
        return {
            "passed": self.passed,
            "violation": v,
            "checked": self.checked,
            "uncertified": self.uncertified,
            "min_relative": self.min_relative,
            "raw_min_relative": self.raw_min_relative,
            "probe_indices": list(self.probe_indices),
        }


def positivity_probe(
    params: QParams,
    window: GridWindow,
    probe_indices: Sequence[int] = DEFAULT_PROBE_INDICES,
    M: KernelMatrix | None = None,
    eps: float = DEFAULT_TOLERANCES.eps_probe,
) -> ProbeReport:
    """Check ``t_i(m, n) >= -eps * (row max)`` for the probed ``i``.

    Entries whose truncation bound exceeds ``eps * (row max)`` cannot be signed
    reliably; they are skipped and counted as ``uncertified``.
    """
    if M is None:
        M = transform_matrix(window, params)
    elif M.window != window:
        raise WindowMismatch(f"kernel window {M.window} differs from {window}")
    checked = 0
    skipped = 0
    min_rel = math.inf
    raw_min = math.inf
    indices = tuple(probe_indices)
    for i in indices:
        tk = translation_kernel(i, M)
        for a, m in enumerate(window):
            row = tk.entries[a]
            rowmax = max(abs(v) for v in row)
            if rowmax == 0:
                continue
            thresh = eps * rowmax
            for b, n in enumerate(window):
                rel = float(row[b] / rowmax)
                raw_min = min(raw_min, rel)
                if tk.tail_bound[a][b] > thresh:
                    skipped += 1
                    continue
                checked += 1
                min_rel = min(min_rel, rel)
                if row[b] < -thresh:
                    return ProbeReport(False, (i, m, n, row[b]), checked, skipped, min_rel, indices, raw_min)
    return ProbeReport(checked > 0, None, checked, skipped, min_rel, indices, raw_min)
