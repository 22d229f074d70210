"""Independent numerical checks for the closed forms.

* Strang split-step Fourier integration of the free Schrödinger, single NLS and
  Manakov equations on a periodic grid.
* Central-difference PDE residuals (Black-Scholes, NLS, free Schrödinger, Manakov)
  of sampled space-time surfaces.
* Norm / momentum / energy bookkeeping for recorded frames.

Equations are written as ``i q_t = -D q_ss - beta |q|^2 q`` with ``D = sigma/2``
for the scalar models.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .manakov import ManakovState
from .market import SpatialGrid, WaveField
from .quantum import DECAY_TOL, BoundaryDecayError, angular_wavenumbers

log = logging.getLogger(__name__)


class StepSizeError(ValueError):
    """dt does not resolve the fastest linear phase on the grid."""


class NumericalDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class FreeSchrodinger:
    sigma: float

    @property
    def dispersion(self) -> float:
        return 0.5 * self.sigma


@dataclass(frozen=True)
class Nls:
    sigma: float
    # constant, or one value per grid node (frozen in time)
    beta: Union[float, np.ndarray] = 0.0

    @property
    def dispersion(self) -> float:
        return 0.5 * self.sigma


@dataclass(frozen=True)
class Manakov:
    beta: Union[float, np.ndarray] = 1.0
    dispersion: float = 0.5


@dataclass(frozen=True)
class BlackScholesPDE:
    sigma: float
    rate: float
    dividend_yield: float = 0.0


Equation = Union[FreeSchrodinger, Nls, Manakov]
Field = Union[WaveField, ManakovState]

# dt * D * kmax^2 must stay below this (kmax = pi / ds).
MAX_PHASE_PER_STEP = 0.5


@dataclass(frozen=True)
class EvolutionSpec:
    equation: Equation
    dt: float
    t_final: float
    record_every: int = 1
    backward: bool = False
    check_decay: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.t_final >= 0:
            raise ValueError("t_final must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_final / self.dt))
        if abs(n * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            raise ValueError(f"t_final={self.t_final} is not a multiple of dt={self.dt}")
        return n


def _components(initial: Field) -> tuple[SpatialGrid, float, np.ndarray]:
    if isinstance(initial, ManakovState):
        return initial.grid, initial.time, initial.as_array()
    return initial.grid, initial.time, initial.values[None, :].copy()


def _wrap(grid: SpatialGrid, t: float, q: np.ndarray, manakov: bool) -> Field:
    if manakov:
        return ManakovState(WaveField(grid, t, q[0]), WaveField(grid, t, q[1]))
    return WaveField(grid, t, q[0])


def _beta_profile(beta, n: int) -> np.ndarray | float:
    if np.ndim(beta) == 0:
        return float(beta)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (n,):
        raise ValueError(f"beta profile must have one value per node ({n}), got {beta.shape}")
    return beta


def check_step(grid: SpatialGrid, dispersion: float, dt: float):
    kmax = math.pi / grid.ds
    phase = abs(dt) * dispersion * kmax**2
    if phase >= MAX_PHASE_PER_STEP:
        raise StepSizeError(
            f"dt={dt} too large: dt*D*kmax^2 = {phase:.3f} >= {MAX_PHASE_PER_STEP} (kmax={kmax:.2f})")


def split_step_evolve(initial: Field, spec: EvolutionSpec) -> list[Field]:
    """Strang splitting: half nonlinear phase, full linear spectral step, half nonlinear phase.

    Frames are recorded at t0, every ``record_every`` steps, and at the final step.
    """
    eq = spec.equation
    manakov = isinstance(eq, Manakov)
    if manakov != isinstance(initial, ManakovState):
        raise TypeError("Manakov equations need a ManakovState, scalar equations a WaveField")
    grid, t0, q = _components(initial)
    grid.require_power_of_two()
    if spec.check_decay:
        for comp in q:
            peak = np.max(np.abs(comp))
            edge = max(abs(comp[0]), abs(comp[-1]))
            if peak > 0 and edge > DECAY_TOL * peak:
                raise BoundaryDecayError(f"initial data not decayed at the boundary (edge/peak={edge / peak:.2e})")

    dt = -spec.dt if spec.backward else spec.dt
    dispersion = eq.dispersion
    check_step(grid, dispersion, dt)
    n_steps = spec.n_steps

    kappa = angular_wavenumbers(grid.n_points, grid.ds)
    linear = np.exp(-1j * dispersion * kappa**2 * dt)
    if isinstance(eq, FreeSchrodinger):
        beta = 0.0
    else:
        beta = _beta_profile(eq.beta, grid.n_points)
    nonlinear = np.any(np.asarray(beta) != 0)
    half = 0.5 * dt

    def kick(q, h):
        if not nonlinear:
            return q
        power = np.sum(np.abs(q) ** 2, axis=0) if manakov else np.abs(q[0]) ** 2
        return q * np.exp(1j * beta * power * h)[None, :]

    frames = [_wrap(grid, t0, q, manakov)]
    for step in range(1, n_steps + 1):
        # Overflow is caught by the finiteness check below.
        with np.errstate(over="ignore", invalid="ignore"):
            q = kick(q, half)
            q = np.fft.ifft(np.fft.fft(q, axis=1) * linear[None, :], axis=1)
            q = kick(q, half)
        if not np.all(np.isfinite(q)):
            raise NumericalDivergence(f"non-finite field at step {step} (t={t0 + step * dt:.6g})")
        if step % spec.record_every == 0 or step == n_steps:
            frames.append(_wrap(grid, t0 + step * dt, q.copy(), manakov))
    log.debug("split-step: %d steps, %d frames", n_steps, len(frames))
    return frames


# ---------------------------------------------------------------- residuals

@dataclass(frozen=True)
class ResidualNorms:
    linf: float
    l2: float


def _diffs(u: np.ndarray, dt: float, ds: float):
    """Central d/dt, d/ds, d^2/ds^2 on interior nodes of a (time, space) lattice."""
    u_t = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * dt)
    u_s = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * ds)
    u_ss = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / ds**2
    return u_t, u_s, u_ss, u[1:-1, 1:-1]


def _uniform_step(x: np.ndarray, name: str) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise ValueError(f"need at least 3 {name} nodes")
    h = np.diff(x)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * abs(h[0]):
        raise ValueError(f"{name} nodes must be uniform and increasing")
    return float(h.mean())


def pde_residual(surface: np.ndarray, t: np.ndarray, s: np.ndarray, equation) -> ResidualNorms:
    """Residual norms of a sampled solution on the interior of a uniform (t, s) lattice.

    ``surface`` has shape (len(t), len(s)), or (2, len(t), len(s)) for Manakov.
    """
    dt = _uniform_step(t, "time")
    ds = _uniform_step(s, "space")
    surface = np.asarray(surface)
    if isinstance(equation, BlackScholesPDE):
        u_t, u_s, u_ss, u = _diffs(surface.astype(float), dt, ds)
        sc = np.asarray(s, dtype=float)[None, 1:-1]
        drift = equation.rate - equation.dividend_yield
        res = u_t - (-0.5 * (equation.sigma * sc) ** 2 * u_ss - drift * sc * u_s + equation.rate * u)
    elif isinstance(equation, (Nls, FreeSchrodinger)):
        q_t, _, q_ss, q = _diffs(surface.astype(complex), dt, ds)
        beta = 0.0 if isinstance(equation, FreeSchrodinger) else equation.beta
        if np.ndim(beta):
            beta = np.asarray(beta)[None, 1:-1]
        res = 1j * q_t + equation.dispersion * q_ss + beta * np.abs(q) ** 2 * q
    elif isinstance(equation, Manakov):
        if surface.ndim != 3 or surface.shape[0] != 2:
            raise ValueError("Manakov surfaces have shape (2, nt, ns)")
        parts = [_diffs(surface[j].astype(complex), dt, ds) for j in range(2)]
        power = np.abs(parts[0][3]) ** 2 + np.abs(parts[1][3]) ** 2
        beta = equation.beta
        if np.ndim(beta):
            beta = np.asarray(beta)[None, 1:-1]
        res = np.stack([1j * q_t + equation.dispersion * q_ss + beta * power * q
                        for q_t, _, q_ss, q in parts])
    else:
        raise TypeError(f"unsupported equation {equation!r}")
    a = np.abs(res)
    return ResidualNorms(linf=float(a.max()), l2=float(math.sqrt(np.sum(a**2) * dt * ds)))


def observed_orders(steps: Sequence[float], errors: Sequence[float]) -> np.ndarray:
    """log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for successive refinements."""
    h = np.asarray(steps, dtype=float)
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


# ---------------------------------------------------------------- invariants

@dataclass(frozen=True)
class ConservedReport:
    time: float
    norm: float
    momentum: float
    energy: float
    norm_drift: float = 0.0
    momentum_drift: float = 0.0
    energy_drift: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _spectral_derivative(q: np.ndarray, ds: float) -> np.ndarray:
    kappa = angular_wavenumbers(q.shape[-1], ds)
    return np.fft.ifft(1j * kappa * np.fft.fft(q, axis=-1), axis=-1)


def _invariants(frame: Field, equation) -> tuple[float, float, float]:
    grid, t, q = _components(frame)
    ds = grid.ds
    q_s = _spectral_derivative(q, ds)
    dens = np.abs(q) ** 2
    norm = float(dens.sum() * ds)
    momentum = float(np.imag(np.sum(np.conj(q) * q_s)) * ds)
    grad = float(np.sum(np.abs(q_s) ** 2) * ds)
    if isinstance(equation, FreeSchrodinger):
        # expectation of H = -(sigma^2/2) d_ss
        energy = 0.5 * equation.sigma**2 * grad
    else:
        beta = 0.0 if equation is None else equation.beta
        power = dens.sum(axis=0)
        quartic = float(np.sum(np.asarray(beta) * power**2) * ds)
        dispersion = 0.5 if equation is None else equation.dispersion
        energy = dispersion * grad - 0.5 * quartic
    return norm, momentum, energy


def _drift(x: float, x0: float) -> float:
    return abs(x - x0) / abs(x0) if x0 != 0 else abs(x - x0)


def conserved_quantities(frames: Sequence[Field], equation) -> list[ConservedReport]:
    if not frames:
        raise ValueError("need at least one frame")
    base = _invariants(frames[0], equation)
    out = []
    for fr in frames:
        n, p, e = _invariants(fr, equation)
        out.append(ConservedReport(
            time=float(fr.time), norm=n, momentum=p, energy=e,
            norm_drift=_drift(n, base[0]), momentum_drift=_drift(p, base[1]), energy_drift=_drift(e, base[2])))
    return out


def max_drift(reports: Sequence[ConservedReport], quantity: str = "norm") -> float:
    return max(getattr(r, f"{quantity}_drift") for r in reports)
