"""The invariant suite behind ``qbirthdeath verify`` and the acceptance tests.

Each check returns a :class:`CheckResult` holding the worst defect it saw and the
tolerance it was held to. Random test functions come from a seeded numpy
generator. Their values are doubles, so they are exact in any binary precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .bdkernel import (
    birth_death_rates,
    chapman_kolmogorov_defect,
    generator_apply,
    heat_residual,
    self_adjoint_defect,
    semigroup_apply,
    stationary_weight,
    transition_row,
)
from .config import DEFAULT_PROBE_INDICES, DEFAULT_TOLERANCES, Tolerances
from .qbessel import orthogonality_defect
from .qcore import GridFunction, GridWindow, QParams, default_window, inner_product, norm_p
from .qfourier import KernelMatrix, hankel_transform, positivity_probe, safe_support, transform_matrix

__all__ = [
    "CheckResult",
    "SuiteContext",
    "SuiteReport",
    "CHECKS",
    "make_context",
    "run_suite",
    "random_function",
]

ROW_STARTS = (-2, 0, 3)
ROW_TIMES = ("0.1", "1", "10")
HEAT_TIMES = ("0.1", "1")
EIGEN_SHIFTS = (-2, 0, 3)
ORTH_RANGE = 4
DEFECT_DIGITS = 6


@dataclass(frozen=True)
class CheckResult:
    name: str
    defect: object
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "defect": _fmt(self.defect),
            "tolerance": _fmt(self.tolerance),
            "pass": self.passed,
        }


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return mpmath.nstr(mpf(x), DEFECT_DIGITS, min_fixed=0, max_fixed=0)


@dataclass
class SuiteContext:
    params: QParams
    window: GridWindow
    M: KernelMatrix
    tol: Tolerances
    seed: int
    n_random: int
    probe_indices: tuple
    support: GridWindow | None

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(stream,)))


def make_context(
    params: QParams,
    window: GridWindow | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
    n_random: int = 20,
    probe_indices: Sequence[int] = DEFAULT_PROBE_INDICES,
) -> SuiteContext:
    window = window or default_window(params)
    M = transform_matrix(window, params)
    support = safe_support(M, tol.eps_window)
    return SuiteContext(params, window, M, tol, seed, n_random, tuple(probe_indices), support)


def random_function(ctx: SuiteContext, rng: np.random.Generator, support: GridWindow) -> GridFunction:
    """Uniform ``[-1, 1)`` values on ``support``, zero elsewhere in the window."""
    vals = rng.uniform(-1.0, 1.0, support.size)
    with ctx.params.workprec():
        g = GridFunction(support, tuple(mpf(float(v)) for v in vals), ctx.params)
        return g.extend(ctx.window)


def _result(name: str, defect, tolerance: float, **detail) -> CheckResult:
    return CheckResult(name, defect, tolerance, bool(defect <= tolerance), detail)


def _no_support(name: str, tolerance: float) -> CheckResult:
    return CheckResult(name, math.inf, tolerance, False, {"reason": "window leaves no safe support"})


def check_orthogonality(ctx: SuiteContext) -> CheckResult:
    worst = mpf(0)
    rng = range(-ORTH_RANGE, ORTH_RANGE + 1)
    for i in rng:
        for j in rng:
            if j < i:
                continue
            worst = max(worst, orthogonality_defect(i, j, ctx.window, ctx.params))
    return _result("orthogonality", worst, ctx.tol.eps_orth)


def _inversion_defects(ctx: SuiteContext) -> tuple:
    inv = mpf(0)
    iso = mpf(0)
    rng = ctx.rng(1)
    with ctx.params.workprec():
        for _ in range(ctx.n_random):
            f = random_function(ctx, rng, ctx.support)
            ff = hankel_transform(f, ctx.M)
            f2 = hankel_transform(ff, ctx.M)
            nf = norm_p(f)
            inv = max(inv, norm_p(f2 - f) / nf)
            iso = max(iso, abs(norm_p(ff) / nf - 1))
    return inv, iso


def check_inversion(ctx: SuiteContext) -> CheckResult:
    if ctx.support is None:
        return _no_support("inversion", ctx.tol.eps_window)
    inv, _ = _inversion_defects(ctx)
    return _result("inversion", inv, ctx.tol.eps_window, support=str(ctx.support))


def check_plancherel(ctx: SuiteContext) -> CheckResult:
    if ctx.support is None:
        return _no_support("plancherel", ctx.tol.eps_window)
    _, iso = _inversion_defects(ctx)
    return _result("plancherel", iso, ctx.tol.eps_window, support=str(ctx.support))


def _rows(ctx: SuiteContext) -> list:
    return [transition_row(r, mpf(t), ctx.M) for r in ROW_STARTS if r in ctx.window for t in ROW_TIMES]


def check_mass(ctx: SuiteContext) -> CheckResult:
    rows = _rows(ctx)
    return _result("mass", max(row.defect for row in rows), ctx.tol.eps_mass)


def check_nonnegative(ctx: SuiteContext) -> CheckResult:
    rows = _rows(ctx)
    worst = max(max(mpf(0), -min(row.probs)) for row in rows)
    return _result("nonnegativity", worst, ctx.tol.eps_pos)


def check_initial_condition(ctx: SuiteContext) -> CheckResult:
    worst = mpf(0)
    for r in ROW_STARTS:
        if r not in ctx.window:
            continue
        row = transition_row(r, 0, ctx.M)
        worst = max(worst, max(abs(p - (1 if n == r else 0)) for n, p in zip(ctx.window, row.probs)))
    return CheckResult("initial_condition", worst, 0.0, worst == 0)


def check_chapman_kolmogorov(ctx: SuiteContext) -> CheckResult:
    half = mpf("0.5")
    worst = max(chapman_kolmogorov_defect(r, half, half, ctx.M) for r in ROW_STARTS if r in ctx.window)
    return _result("chapman_kolmogorov", worst, ctx.tol.eps_ck)


def check_semigroup(ctx: SuiteContext) -> CheckResult:
    """``||P_t P_s f - P_{t+s} f|| / ||f||`` through the spectral form, ``t = s = 1/2``."""
    if ctx.support is None:
        return _no_support("semigroup", ctx.tol.eps_ck)
    rng = ctx.rng(2)
    half = mpf("0.5")
    worst = mpf(0)
    with ctx.params.workprec():
        for _ in range(min(ctx.n_random, 5)):
            f = random_function(ctx, rng, ctx.support)
            twice = semigroup_apply(semigroup_apply(f, half, ctx.M), half, ctx.M)
            once = semigroup_apply(f, 2 * half, ctx.M)
            worst = max(worst, norm_p(twice - once) / norm_p(f))
    return _result("semigroup", worst, ctx.tol.eps_ck)


def check_heat(ctx: SuiteContext) -> CheckResult:
    p = ctx.params
    data = []
    if 0 in ctx.window:
        data.append(GridFunction.indicator(ctx.window, p, 0))
    data.append(GridFunction(ctx.window, tuple(ctx.M.bessel_row(0)), p))
    worst = max(heat_residual(f, mpf(t), ctx.M) for f in data for t in HEAT_TIMES)
    return _result("heat_residual", worst, ctx.tol.eps_heat)


def check_eigenfunction(ctx: SuiteContext) -> CheckResult:
    """``Delta j(q^k .) = -q^{2k} j(q^k .)``, relative to ``q^{2k} max |j(q^k .)|``."""
    p = ctx.params
    worst = mpf(0)
    for k in EIGEN_SHIFTS:
        f = GridFunction(ctx.window, tuple(ctx.M.bessel_row(k)), p)
        lf = generator_apply(f)
        with p.workprec():
            lam = p.qpow(2 * k)
            fi = f.restrict(lf.window)
            err = max(abs(a + lam * b) for a, b in zip(lf.values, fi.values))
            worst = max(worst, err / (lam * fi.max_abs()))
    return _result("eigenfunction", worst, ctx.tol.eps_window)


def _edge_free(ctx: SuiteContext) -> GridWindow | None:
    if ctx.support is None:
        return None
    lo = max(ctx.support.n_lo, ctx.window.n_lo + 2)
    hi = min(ctx.support.n_hi, ctx.window.n_hi - 2)
    return GridWindow(lo, hi) if lo <= hi else None


def check_self_adjoint(ctx: SuiteContext) -> CheckResult:
    support = _edge_free(ctx)
    if support is None:
        return _no_support("self_adjoint", ctx.tol.eps_window)
    rng = ctx.rng(3)
    worst = mpf(0)
    with ctx.params.workprec():
        for _ in range(ctx.n_random):
            f = random_function(ctx, rng, support)
            g = random_function(ctx, rng, support)
            worst = max(worst, self_adjoint_defect(f, g) / (norm_p(f) * norm_p(g)))
    return _result("self_adjoint", worst, ctx.tol.eps_window)


def check_positive_semigroup(ctx: SuiteContext) -> CheckResult:
    """``-<P_t f, f> / ||f||^2`` clipped at 0; ``P_t`` is a positive operator."""
    if ctx.support is None:
        return _no_support("semigroup_positive", ctx.tol.eps_window)
    rng = ctx.rng(4)
    worst = mpf(0)
    with ctx.params.workprec():
        for _ in range(ctx.n_random):
            f = random_function(ctx, rng, ctx.support)
            for t in HEAT_TIMES:
                v = inner_product(semigroup_apply(f, mpf(t), ctx.M), f) / norm_p(f) ** 2
                worst = max(worst, -v)
    return _result("semigroup_positive", worst, ctx.tol.eps_window)


def check_detailed_balance(ctx: SuiteContext) -> CheckResult:
    p = ctx.params
    worst = mpf(0)
    with p.workprec():
        for n in range(ctx.window.n_lo, ctx.window.n_hi):
            lam, _ = birth_death_rates(n, p)
            _, mu = birth_death_rates(n + 1, p)
            up = stationary_weight(n, p) * lam
            down = stationary_weight(n + 1, p) * mu
            worst = max(worst, abs(up - down) / up)
    # fractional powers of q are exp(e log q): allow a few dozen ulps
    return _result("detailed_balance", worst, 2.0 ** (8 - p.precision_bits))


def check_positivity_probe(ctx: SuiteContext) -> CheckResult:
    rep = positivity_probe(ctx.params, ctx.window, ctx.probe_indices, M=ctx.M, eps=ctx.tol.eps_probe)
    defect = max(0.0, -rep.min_relative) if rep.checked else math.inf
    return CheckResult(
        "positivity_probe",
        defect,
        ctx.tol.eps_probe,
        rep.passed,
        {"checked": rep.checked, "uncertified": rep.uncertified},
    )


CHECKS: dict[str, Callable[[SuiteContext], CheckResult]] = {
    "orthogonality": check_orthogonality,
    "inversion": check_inversion,
    "plancherel": check_plancherel,
    "mass": check_mass,
    "nonnegativity": check_nonnegative,
    "initial_condition": check_initial_condition,
    "chapman_kolmogorov": check_chapman_kolmogorov,
    "semigroup": check_semigroup,
    "heat_residual": check_heat,
    "eigenfunction": check_eigenfunction,
    "self_adjoint": check_self_adjoint,
    "semigroup_positive": check_positive_semigroup,
    "detailed_balance": check_detailed_balance,
    "positivity_probe": check_positivity_probe,
}


@dataclass(frozen=True)
class SuiteReport:
    params: QParams
    window: GridWindow
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def run_suite(ctx: SuiteContext, names: Sequence[str] | None = None) -> SuiteReport:
    """Run the named checks (all of them by default) in a fixed order."""
    names = list(CHECKS) if names is None else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    results = []
    for name in names:
        try:
            results.append(CHECKS[name](ctx))
        except (ArithmeticError, LookupError, ValueError) as exc:
            results.append(CheckResult(name, math.inf, math.nan, False, {"error": str(exc)}))
    return SuiteReport(ctx.params, ctx.window, tuple(results))
