"""Market primitives: price grids, option parameters, GBM sampling, wave fields."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

# PCG64 is the documented bit generator for every seeded draw in the package.
RNG_ALGORITHM = "numpy.random.PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SpatialGrid:
    s_min: float
    s_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.s_min) and math.isfinite(self.s_max)):
            raise ValueError("grid bounds must be finite")
        if self.s_min >= self.s_max:
            raise ValueError(f"s_min ({self.s_min}) must be < s_max ({self.s_max})")
        if self.n_points < 8:
            raise ValueError(f"need at least 8 grid nodes, got {self.n_points}")

    @property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n_points)

    @property
    def is_power_of_two(self) -> bool:
        n = self.n_points
        return n & (n - 1) == 0

    def require_power_of_two(self):
        if not self.is_power_of_two:
            raise ValueError(f"spectral operations need 2^j nodes, got {self.n_points}")

    def to_dict(self) -> dict:
        return {"s_min": self.s_min, "s_max": self.s_max, "n": self.n_points}


def make_grid(s_min: float, s_max: float, n_points: int) -> SpatialGrid:
    return SpatialGrid(float(s_min), float(s_max), int(n_points))


def periodic_grid(length: float, n_points: int, center: float = 0.0) -> SpatialGrid:
    """Grid for spectral work: n nodes with spacing length/n, last node excluded
    from the period so that s_max + ds wraps onto s_min."""
    ds = length / n_points
    s_min = center - length / 2
    return SpatialGrid(s_min, s_min + ds * (n_points - 1), n_points)


@dataclass(frozen=True)
class OptionParams:
    strike: float = 100.0
    rate: float = 0.05
    volatility: float = 0.2
    maturity: float = 1.0
    dividend_yield: float = 0.0

    def __post_init__(self):
        if not self.volatility > 0:
            raise ValueError(f"volatility must be > 0, got {self.volatility}")
        if not self.maturity > 0:
            raise ValueError(f"maturity must be > 0, got {self.maturity}")
        if not self.strike > 0:
            raise ValueError(f"strike must be > 0, got {self.strike}")
        if not (math.isfinite(self.rate) and math.isfinite(self.dividend_yield)):
            raise ValueError("rate and dividend_yield must be finite")

    def replace(self, **changes) -> "OptionParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class GbmPath:
    times: np.ndarray
    prices: np.ndarray
    drift: float
    volatility: float
    seed: int


def _check_gbm_inputs(s0, volatility, n_steps):
    if not s0 > 0:
        raise ValueError(f"initial price must be > 0, got {s0}")
    if volatility < 0:
        raise ValueError(f"volatility must be >= 0, got {volatility}")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")


def simulate_gbm(s0: float, drift: float, volatility: float, horizon: float,
                 n_steps: int, seed: int) -> GbmPath:
    """Sample one GBM path on a uniform time grid using the exact log-space solution."""
    _check_gbm_inputs(s0, volatility, n_steps)
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    dt = horizon / n_steps
    xi = make_rng(seed).standard_normal(n_steps)
    increments = (drift - 0.5 * volatility**2) * dt + volatility * math.sqrt(dt) * xi
    log_path = np.concatenate(([0.0], np.cumsum(increments)))
    times = np.linspace(0.0, horizon, n_steps + 1)
    return GbmPath(times, s0 * np.exp(log_path), drift, volatility, seed)


def simulate_gbm_terminal(s0: float, drift: float, volatility: float, horizon: float,
                          n_paths: int, seed: int) -> np.ndarray:
    """Terminal values s(horizon) for n_paths independent exact-GBM paths."""
    _check_gbm_inputs(s0, volatility, 1)
    xi = make_rng(seed).standard_normal(n_paths)
    return s0 * np.exp((drift - 0.5 * volatility**2) * horizon
                       + volatility * math.sqrt(horizon) * xi)


@dataclass(frozen=True)
class WaveField:
    grid: SpatialGrid
    time: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("wave field contains non-finite samples")
        object.__setattr__(self, "values", values)

    @property
    def s(self) -> np.ndarray:
        return self.grid.nodes

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.grid.ds)
