"""Gillespie simulation of the bilateral birth-death chain and comparison with the analytic rows.

Path ``k`` of an ensemble draws from its own generator seeded by
``numpy.random.SeedSequence(seed, spawn_key=(k,))``, the same stream that
``SeedSequence(seed).spawn(...)`` would hand out as child ``k``. Results are
therefore independent of how paths are split across workers.

Everything here runs in double precision and shares no code with the quadrature
in :mod:`qbirthdeath.bdkernel`.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bdkernel import TransitionRow
from .qcore import GridWindow, QParams

logger = logging.getLogger(__name__)

REACHED = "reached_t_end"
HIT_GUARD = "hit_guard"
MAX_EVENTS = "max_events"

EXCLUDED_WARN_FRACTION = 1e-3


def rates(i: int, params: QParams) -> tuple[float, float]:
    """``(lambda_i, mu_i) = (q^{2nu-2i}, q^{-2i})``: up-jump and down-jump rates at ``q^i``."""
    q = params.qf
    return q ** (2 * params.nuf - 2 * i), q ** (-2 * i)


@dataclass(frozen=True)
class SimConfig:
    params: QParams
    r: int
    t_end: float
    n_paths: int
    seed: int
    guard_window: GridWindow
    max_events: int = 1_000_000

    def __post_init__(self):
        if self.r not in self.guard_window:
            raise ValueError(f"start {self.r} outside guard window {self.guard_window}")
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "t_end": repr(float(self.t_end)),
            "n_paths": self.n_paths,
            "seed": self.seed,
            "guard": str(self.guard_window),
            "max_events": self.max_events,
        }


@dataclass(frozen=True)
class PathSample:
    """Jump times with the state entered at each; ``start`` is the state at time 0."""

    start: int
    events: tuple
    terminal: str

    @property
    def final_index(self) -> int:
        return self.events[-1][1] if self.events else self.start


def path_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


def simulate_path(cfg: SimConfig, k: int) -> PathSample:
    """Simulate path ``k`` of the ensemble described by ``cfg`` until ``t_end``."""
    rng = path_rng(cfg.seed, k)
    lo, hi = cfg.guard_window.n_lo, cfg.guard_window.n_hi
    i = cfg.r
    t = 0.0
    events = []
    while True:
        lam, mu = rates(i, cfg.params)
        total = lam + mu
        t += rng.standard_exponential() / total
        if t >= cfg.t_end:
            return PathSample(cfg.r, tuple(events), REACHED)
        if len(events) >= cfg.max_events:
            return PathSample(cfg.r, tuple(events), MAX_EVENTS)
        i = i + 1 if rng.random() * total < lam else i - 1
        events.append((t, i))
        if not lo <= i <= hi:
            return PathSample(cfg.r, tuple(events), HIT_GUARD)


def _run_chunk(cfg: SimConfig, start: int, stop: int) -> tuple[Counter, int, int]:
    counts: Counter = Counter()
    n_guard = n_maxed = 0
    for k in range(start, stop):
        path = simulate_path(cfg, k)
        if path.terminal == REACHED:
            counts[path.final_index] += 1
        elif path.terminal == HIT_GUARD:
            n_guard += 1
        else:
            n_maxed += 1
    return counts, n_guard, n_maxed


@dataclass(frozen=True)
class EnsembleStats:
    counts: dict
    n_valid: int
    n_guard: int
    n_maxed: int
    r: int
    t_end: float
    params: QParams = field(repr=False)

    @property
    def n_paths(self) -> int:
        return self.n_valid + self.n_guard + self.n_maxed


def simulate_ensemble(cfg: SimConfig, workers: int = 1) -> EnsembleStats:
    """End states of ``cfg.n_paths`` independent paths, optionally spread over processes."""
    n = cfg.n_paths
    if workers <= 1:
        parts = [_run_chunk(cfg, 0, n)]
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * workers, bounds[:-1], bounds[1:]))
    counts: Counter = Counter()
    n_guard = n_maxed = 0
    for c, g, m in parts:
        counts.update(c)
        n_guard += g
        n_maxed += m
    stats = EnsembleStats(
        dict(sorted(counts.items())), sum(counts.values()), n_guard, n_maxed, cfg.r, cfg.t_end, cfg.params
    )
    excluded = n_guard + n_maxed
    if excluded > EXCLUDED_WARN_FRACTION * n:
        msg = f"{excluded} of {n} paths excluded ({n_guard} left the guard window, {n_maxed} hit max_events)"
        logger.warning(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return stats


@dataclass(frozen=True)
class ComparisonReport:
    tv: float
    threshold: float
    K: int
    max_abs_z: float
    passed: bool
    n_valid: int
    n_guard: int
    n_maxed: int
    table: tuple  # (n, empirical frequency, analytic probability, z)

    def as_dict(self) -> dict:
        return {
            "tv": self.tv,
            "threshold": self.threshold,
            "K": self.K,
            "max_abs_z": self.max_abs_z,
            "pass": self.passed,
            "n_valid": self.n_valid,
            "n_guard": self.n_guard,
            "n_maxed": self.n_maxed,
        }


def mass_support_size(probs, mass: float = 0.999) -> int:
    """Smallest number of states whose analytic probabilities add up to ``mass``."""
    total = 0.0
    for k, p in enumerate(sorted(probs, reverse=True), start=1):
        total += p
        if total >= mass:
            return k
    return len(probs)


def _z_score(count: int, n: int, p: float) -> float:
    expected = n * p
    var = n * p * (1 - p)
    if var <= 0:
        return 0.0 if count == expected else math.inf
    return (count - expected) / math.sqrt(var)


def empirical_vs_analytic(
    stats: EnsembleStats, row: TransitionRow, z_max: float = 4.0, excluded_max: float = EXCLUDED_WARN_FRACTION
) -> ComparisonReport:
    """Total-variation distance and per-state binomial z-scores of the empirical end states.

    Passes when ``TV <= 3 sqrt(K / (2 n_valid))`` with ``K`` the number of states
    carrying 99.9% of the analytic mass, every ``|z| <= z_max``, and at most
    ``excluded_max`` of the paths were excluded.
    """
    if row.r != stats.r:
        raise ValueError(f"start states differ: row r={row.r}, ensemble r={stats.r}")
    if not math.isclose(float(row.t), float(stats.t_end), rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"times differ: row t={float(row.t)}, ensemble t={stats.t_end}")
    if (row.params.q, row.params.nu) != (stats.params.q, stats.params.nu):
        raise ValueError("parameters differ between row and ensemble")
    n = stats.n_valid
    analytic = {k: float(p) for k, p in zip(row.window, row.probs)}
    states = sorted(set(analytic) | set(stats.counts))
    table = []
    tv = 0.0
    max_z = 0.0
    for k in states:
        p = max(analytic.get(k, 0.0), 0.0)
        c = stats.counts.get(k, 0)
        freq = c / n if n else 0.0
        z = _z_score(c, n, p) if n else 0.0
        tv += abs(freq - p)
        max_z = max(max_z, abs(z))
        table.append((k, freq, p, z))
    tv *= 0.5
    K = mass_support_size([max(p, 0.0) for p in analytic.values()])
    threshold = 3 * math.sqrt(K / (2 * n)) if n else 0.0
    excluded = stats.n_guard + stats.n_maxed
    passed = n > 0 and tv <= threshold and max_z <= z_max and excluded <= excluded_max * stats.n_paths
    return ComparisonReport(tv, threshold, K, max_z, passed, n, stats.n_guard, stats.n_maxed, tuple(table))

