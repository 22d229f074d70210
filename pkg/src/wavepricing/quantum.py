"""Linear (free Schrödinger) option-wave model.

Volatility plays the role of Planck's constant: ``i sigma psi_t = -(sigma^2/2) psi_ss``,
equivalently ``i psi_t = -(sigma/2) psi_ss``, with plane-wave dispersion
``omega_k = sigma k^2 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .market import WaveField


class BoundaryDecayError(ValueError):
    """A periodic spectral method was handed a field that does not decay at the edges."""


DECAY_TOL = 1e-10


@dataclass(frozen=True)
class PlaneWaveBasis:
    sigma: float
    waves: tuple
    # Fitted bases may carry a negative sigma; the physical model needs sigma > 0.
    strict: bool = True

    def __post_init__(self):
        waves = tuple((float(k), float(c)) for k, c in self.waves)
        if not waves:
            raise ValueError("basis needs at least one plane wave")
        if not all(math.isfinite(k) and math.isfinite(c) for k, c in waves):
            raise ValueError("wave numbers and amplitudes must be finite")
        if self.strict and not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite")
        object.__setattr__(self, "waves", waves)

    @property
    def n(self) -> int:
        return len(self.waves)

    @property
    def k(self) -> np.ndarray:
        return np.array([w[0] for w in self.waves])

    @property
    def c(self) -> np.ndarray:
        return np.array([w[1] for w in self.waves])

    @classmethod
    def from_arrays(cls, sigma, k, c, strict=True) -> "PlaneWaveBasis":
        return cls(float(sigma), tuple(zip(np.ravel(k), np.ravel(c))), strict=strict)


def plane_wave(s, t, amplitude: float, k: float, sigma: float):
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    s = np.asarray(s, dtype=float)
    return amplitude * np.exp(1j * (k * s - 0.5 * sigma * k * k * np.asarray(t, dtype=float)))


def _modes(s, t, basis: PlaneWaveBasis):
    # shape (n_waves, *s.shape)
    s = np.asarray(s, dtype=float)
    k = basis.k.reshape((-1,) + (1,) * s.ndim)
    return np.exp(1j * (k * s - 0.5 * basis.sigma * k * k * t))


def wave_packet(s, t, basis: PlaneWaveBasis):
    modes = _modes(s, t, basis)
    c = basis.c.reshape((-1,) + (1,) * (modes.ndim - 1))
    return np.sum(c * modes, axis=0)


def packet_pdf(s, t, basis: PlaneWaveBasis):
    return np.abs(wave_packet(s, t, basis)) ** 2


def packet_pdf_jacobian(s, t, basis: PlaneWaveBasis) -> np.ndarray:
    """d|psi|^2 / d(sigma, t, k_1..k_n, c_1..c_n), one row per s node."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    modes = _modes(s, t, basis)
    k = basis.k[:, None]
    c = basis.c[:, None]
    psi_conj = np.conj(np.sum(c * modes, axis=0))
    cm = c * modes
    d_sigma = np.sum(-0.5j * t * k * k * cm, axis=0)
    d_t = np.sum(-0.5j * basis.sigma * k * k * cm, axis=0)
    d_k = 1j * (s[None, :] - basis.sigma * k * t) * cm
    d_c = modes
    cols = [d_sigma[None, :], d_t[None, :], d_k, d_c]
    dpsi = np.vstack(cols)
    return (2.0 * np.real(psi_conj[None, :] * dpsi)).T


@dataclass(frozen=True)
class DispersionReport:
    omega_k: float
    lambda_k: float
    period_k: float
    v_phase: float
    v_group: float
    v_group_fd: float
    energy_k: float
    momentum: float
    packet_center: float
    # False for k = 0, where wavelength, period and phase velocity are undefined.
    ratios_defined: bool


def dispersion(k: float, sigma: float, t: float = 0.0, fd_step: float = 1e-5) -> DispersionReport:
    omega = lambda kk: 0.5 * sigma * kk * kk
    w = omega(k)
    v_group = sigma * k
    v_group_fd = (omega(k + fd_step) - omega(k - fd_step)) / (2.0 * fd_step)
    defined = k != 0
    nan = float("nan")
    return DispersionReport(
        omega_k=w,
        lambda_k=2.0 * math.pi / k if defined else nan,
        period_k=2.0 * math.pi / w if defined else nan,
        v_phase=w / k if defined else nan,
        v_group=v_group,
        v_group_fd=v_group_fd,
        energy_k=sigma * w,
        momentum=sigma * k,
        packet_center=t * v_group,
        ratios_defined=defined,
    )


def packet_energy(n: int, k: float, sigma: float) -> float:
    """Total energy of n similar plane waves, n (sigma k)^2 / 2."""
    return 0.5 * n * (sigma * k) ** 2


def boltzmann_mean_energy(energy_k: float, b: float, market_temperature: float) -> float:
    """<E> = E_k / (exp(E_k / (b T)) - 1)."""
    bt = b * market_temperature
    if not (b > 0 and market_temperature > 0):
        raise ValueError("kinetic constant and market temperature must be positive")
    if not energy_k > 0:
        raise ValueError("E_k must be positive")
    return energy_k / math.expm1(energy_k / bt)


@dataclass(frozen=True)
class GaussianPacketSpec:
    width: float = 1.0
    s0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("Gaussian width parameter a must be > 0")


def gaussian_packet(s, t, spec: GaussianPacketSpec, sigma: float = 1.0):
    """Normalised free Gaussian packet.

    ``p0`` is the momentum sigma*k0.  For sigma != 1 the unit-sigma closed form
    is evaluated at time sigma*t with wave number p0/sigma.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    a = spec.width
    tau = sigma * np.asarray(t, dtype=float)
    k0 = spec.p0 / sigma
    y = np.asarray(s, dtype=float) - spec.s0
    denom = 1.0 + 1j * a * tau
    expo = (-0.5 * a * y * y - 0.5j * k0 * k0 * tau + 1j * k0 * y) / denom
    return np.sqrt(math.sqrt(a / math.pi) / denom) * np.exp(expo)


def _check_decay(values: np.ndarray, tol: float = DECAY_TOL):
    peak = np.max(np.abs(values))
    edge = max(abs(values[0]), abs(values[-1]))
    if peak > 0 and edge > tol * peak:
        raise BoundaryDecayError(
            f"field is not decayed at the periodic boundary (edge/peak = {edge / peak:.2e} > {tol:.0e})")


def angular_wavenumbers(n: int, ds: float) -> np.ndarray:
    return 2.0 * math.pi * np.fft.fftfreq(n, d=ds)


def fourier_propagate(initial: WaveField, t: float, sigma: float, check_decay: bool = True) -> WaveField:
    """Exact free evolution: multiply the spectrum by exp(-i sigma k^2 t / 2)."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    grid = initial.grid
    grid.require_power_of_two()
    if check_decay:
        _check_decay(initial.values)
    kappa = angular_wavenumbers(grid.n_points, grid.ds)
    spectrum = np.fft.fft(initial.values)
    out = np.fft.ifft(spectrum * np.exp(-0.5j * sigma * kappa * kappa * t))
    return WaveField(grid, initial.time + t, out)


@dataclass(frozen=True)
class Expectations:
    mean_s: float
    mean_k: float
    delta_s: float
    delta_k: float

    @property
    def product(self) -> float:
        return self.delta_s * self.delta_k


def expectations(field: WaveField) -> Expectations:
    """Moments of the normalised position density |phi(s)|^2 and spectral density |phi^(k)|^2."""
    rho = field.density()
    total = rho.sum()
    if not total > 0:
        raise ValueError("field has zero norm")
    s = field.s
    rho = rho / total
    mean_s = float(np.sum(s * rho))
    var_s = float(np.sum((s - mean_s) ** 2 * rho))

    kappa = angular_wavenumbers(field.grid.n_points, field.grid.ds)
    spec = np.abs(np.fft.fft(field.values)) ** 2
    spec = spec / spec.sum()
    mean_k = float(np.sum(kappa * spec))
    var_k = float(np.sum((kappa - mean_k) ** 2 * spec))
    return Expectations(mean_s, mean_k, math.sqrt(max(var_s, 0.0)), math.sqrt(max(var_k, 0.0)))


def energy_eigenstate(s, energy_k: float, c1: complex, c2: complex, sigma: float):
    if energy_k < 0:
        raise ValueError("E_k must be >= 0")
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    k = math.sqrt(2.0 * energy_k) / sigma
    s = np.asarray(s, dtype=float)
    return c1 * np.exp(1j * k * s) + c2 * np.exp(-1j * k * s)


def apply_hamiltonian(phi: np.ndarray, ds: float, sigma: float) -> np.ndarray:
    """-(sigma^2/2) phi'' by central differences on interior nodes."""
    phi = np.asarray(phi)
    return -0.5 * sigma**2 * (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / ds**2


@dataclass(frozen=True)
class QuantumGreeks:
    delta: float
    vega: float
    theta: float
    gamma: float

    def as_dict(self) -> dict:
        return {"delta": self.delta, "vega": self.vega, "theta": self.theta, "gamma": self.gamma}


def quantum_greeks(basis: PlaneWaveBasis, s, t: float):
    """Exact partial derivatives of the packet PDF |psi|^2 via d|psi|^2 = 2 Re(conj(psi) dpsi)."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    modes = _modes(s, t, basis)
    k = basis.k[:, None]
    cm = basis.c[:, None] * modes
    psi = cm.sum(axis=0)
    psi_s = np.sum(1j * k * cm, axis=0)
    psi_ss = np.sum(-k * k * cm, axis=0)
    psi_sigma = np.sum(-0.5j * t * k * k * cm, axis=0)
    psi_t = np.sum(-0.5j * basis.sigma * k * k * cm, axis=0)
    conj = np.conj(psi)
    delta = 2.0 * np.real(conj * psi_s)
    vega = 2.0 * np.real(conj * psi_sigma)
    theta = 2.0 * np.real(conj * psi_t)
    gamma = 2.0 * np.real(conj * psi_ss) + 2.0 * np.abs(psi_s) ** 2
    if scalar:
        return QuantumGreeks(float(delta[0]), float(vega[0]), float(theta[0]), float(gamma[0]))
    return QuantumGreeks(delta, vega, theta, gamma)


def basis_from_pairs(sigma: float, k: Sequence[float], c: Sequence[float], strict: bool = True):
    return PlaneWaveBasis.from_arrays(sigma, k, c, strict=strict)
