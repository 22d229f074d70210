"""Vector bright soliton of the coupled (volatility, option-price) NLS system

    i q_t = -D q_ss - beta (|q1|^2 + |q2|^2) q,      q = (sigma, psi)

and superposed multi-soliton initial data for collision runs.

The reference two-component soliton ``2b c sech(2b(s + 4at)) exp(-2i(2a^2 t + a s - 2b^2 t))``
is exact for ``D = 1, beta = 2``.  For general constants it is mapped by
``q(s, t) = sqrt(2D/beta) Q(s, D t)``; with the defaults ``D = 1/2, beta = 1``
that is the reference form at half the time argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .market import SpatialGrid, WaveField

DEFAULT_DISPERSION = 0.5
DEFAULT_COUPLING = 1.0


@dataclass(frozen=True)
class SolitonSpec:
    a: float
    b: float
    c: tuple = (1.0, 0.0)

    def __post_init__(self):
        c = tuple(complex(x) for x in self.c)
        if len(c) != 2:
            raise ValueError("polarization must have two components")
        if abs(abs(c[0]) ** 2 + abs(c[1]) ** 2 - 1.0) > 1e-12:
            raise ValueError(f"polarization must be a unit vector, |c|^2 = {abs(c[0])**2 + abs(c[1])**2}")
        if self.b == 0:
            raise ValueError("b must be nonzero")
        object.__setattr__(self, "c", c)

    def velocity(self, dispersion: float = 0.5) -> float:
        """Envelope velocity ds/dt; -4a in the unit-dispersion frame."""
        return -4.0 * self.a * dispersion


@dataclass(frozen=True)
class ManakovState:
    sigma_field: WaveField
    psi_field: WaveField

    def __post_init__(self):
        if self.sigma_field.grid != self.psi_field.grid:
            raise ValueError("both components must share a grid")
        if self.sigma_field.time != self.psi_field.time:
            raise ValueError("both components must share a time")

    @property
    def grid(self) -> SpatialGrid:
        return self.sigma_field.grid

    @property
    def time(self) -> float:
        return self.sigma_field.time

    def total_power(self) -> np.ndarray:
        return self.sigma_field.density() + self.psi_field.density()

    def as_array(self) -> np.ndarray:
        return np.vstack([self.sigma_field.values, self.psi_field.values])


def _reference_soliton(s, t, spec: SolitonSpec):
    a, b = spec.a, spec.b
    env = 2.0 * b / np.cosh(2.0 * b * (s + 4.0 * a * t))
    phase = np.exp(-2j * (2.0 * a * a * t + a * s - 2.0 * b * b * t))
    return spec.c[0] * env * phase, spec.c[1] * env * phase


def manakov_soliton(s, t, spec: SolitonSpec, dispersion: float = DEFAULT_DISPERSION,
                    coupling: float = DEFAULT_COUPLING, offset: float = 0.0):
    """(sigma, psi) components of the bright vector soliton centred at ``offset`` at t = 0."""
    if dispersion <= 0 or coupling <= 0:
        raise ValueError("dispersion and coupling must be positive")
    s = np.asarray(s, dtype=float) - offset
    scale = np.sqrt(2.0 * dispersion / coupling)
    q1, q2 = _reference_soliton(s, dispersion * np.asarray(t, dtype=float), spec)
    return scale * q1, scale * q2


def soliton_state(grid: SpatialGrid, t: float, spec: SolitonSpec, **kw) -> ManakovState:
    q1, q2 = manakov_soliton(grid.nodes, t, spec, **kw)
    return ManakovState(WaveField(grid, t, q1), WaveField(grid, t, q2))


def cross_overlap(specs: Sequence[SolitonSpec], offsets: Sequence[float], grid: SpatialGrid, **kw) -> float:
    """Largest pairwise overlap integral of |u_i| |u_j| summed over components."""
    s = grid.nodes
    fields = [np.abs(np.array(manakov_soliton(s, 0.0, sp, offset=o, **kw)))
              for sp, o in zip(specs, offsets)]
    worst = 0.0
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            worst = max(worst, float(np.sum(fields[i] * fields[j]) * grid.ds))
    return worst


def collision_initial_condition(specs: Sequence[SolitonSpec], offsets: Sequence[float],
                                grid: SpatialGrid, max_overlap: float = 1e-8, **kw) -> ManakovState:
    """Sum of offset single solitons; valid as multi-soliton data only when well separated."""
    if len(specs) != len(offsets):
        raise ValueError("one offset per soliton")
    if len(specs) < 1:
        raise ValueError("need at least one soliton")
    if len(specs) > 1:
        overlap = cross_overlap(specs, offsets, grid, **kw)
        if overlap >= max_overlap:
            raise ValueError(f"solitons overlap ({overlap:.3e} >= {max_overlap:.1e}); separate them further")
    s = grid.nodes
    q1 = np.zeros(grid.n_points, dtype=complex)
    q2 = np.zeros(grid.n_points, dtype=complex)
    for spec, off in zip(specs, offsets):
        a1, a2 = manakov_soliton(s, 0.0, spec, offset=off, **kw)
        q1 += a1
        q2 += a2
    return ManakovState(WaveField(grid, 0.0, q1), WaveField(grid, 0.0, q2))


def count_peaks(profile: np.ndarray, rel_threshold: float = 0.5) -> int:
    """Number of strict local maxima above rel_threshold * max(profile)."""
    y = np.asarray(profile, dtype=float)
    level = rel_threshold * y.max()
    interior = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > level)
    return int(np.count_nonzero(interior))


def peak_positions(s: np.ndarray, profile: np.ndarray, rel_threshold: float = 0.5) -> np.ndarray:
    y = np.asarray(profile, dtype=float)
    level = rel_threshold * y.max()
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > level)) + 1
    return np.asarray(s)[idx]
