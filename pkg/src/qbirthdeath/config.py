"""Tolerances shared by the verification suite, the CLI and the tests."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    """Acceptance tolerances at 192-bit precision on the default window.

    ``eps_probe`` is relative to the largest magnitude in a kernel row; the rest
    are absolute, or relative to a norm where the check says so.
    """

    eps_orth: float = 1e-20
    eps_window: float = 1e-18
    eps_mass: float = 1e-18
    eps_ck: float = 1e-15
    eps_heat: float = 1e-12
    eps_pos: float = 1e-20
    eps_probe: float = 1e-15

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()

# Probed translation base points i (x = q^i); large x is where sign changes for nu < 0 show up.
DEFAULT_PROBE_INDICES = tuple(range(-3, 7))
