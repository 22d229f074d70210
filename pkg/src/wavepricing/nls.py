"""Closed-form travelling-wave solutions of the adaptive focusing NLS

    i psi_t = -(sigma/2) psi_ss - beta |psi|^2 psi

with the erf-shaped market-heat potential ``beta(r, w; s)``.

All four solutions share the carrier ``exp(i (k s - omega t))`` and an envelope
depending only on ``xi = s - sigma k t``.  The elliptic solutions use modulus
``m``, i.e. the Jacobi functions are evaluated at parameter ``m**2``; only then
does the amplitude ``m sqrt(-sigma/beta)`` and frequency
``sigma (1 + m^2 + k^2) / 2`` give an exact solution.

When ``beta`` comes from a weight set it varies with ``s``; the closed forms then
use the pointwise value as a frozen coefficient and are no longer exact PDE
solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .special import erf, jacobi_sncndn


class SingularPotentialError(ValueError):
    """beta vanishes where an amplitude sqrt(sigma/beta) is needed."""


class RadicandSignError(ValueError):
    """The amplitude radicand is negative and magnitude mode is off."""


@dataclass(frozen=True)
class WeightSet:
    rows: tuple = field(default=((1.0, 1.0, 1.0),))

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        if not rows:
            raise ValueError("weight set needs at least one row")
        for row in rows:
            if len(row) != 3:
                raise ValueError(f"weight rows are (w1, w2, w3) triples, got {row}")
            if row[2] == 0:
                raise ValueError("w3 must be nonzero in every row")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    @classmethod
    def from_flat(cls, flat: Sequence[float]) -> "WeightSet":
        flat = list(flat)
        if len(flat) % 3:
            raise ValueError("flat weight vector length must be a multiple of 3")
        return cls(tuple(tuple(flat[i:i + 3]) for i in range(0, len(flat), 3)))


def beta(rate: float, weights: WeightSet, s):
    """Adaptive market-heat potential r * sum_i w1_i erf(w2_i s / w3_i)."""
    w = weights.as_array()
    s = np.asarray(s, dtype=float)
    terms = w[:, 0, None] * erf(np.multiply.outer(w[:, 1] / w[:, 2], s.ravel()))
    out = rate * terms.sum(axis=0)
    return out.reshape(s.shape)[()] if s.ndim == 0 else out.reshape(s.shape)


@dataclass(frozen=True)
class NlsParams:
    sigma: float = 0.2
    rate: float = 0.05
    wave_number: float = 1.0
    modulus: float = 0.5
    weights: WeightSet | None = None
    # A constant potential overrides the weight set when given.
    const_beta: float | None = None
    branch: int = 1
    magnitude_mode: bool = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.modulus <= 1.0:
            raise ValueError(f"modulus must lie in [0, 1], got {self.modulus}")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if self.weights is None and self.const_beta is None:
            raise ValueError("give either a constant beta or a weight set")

    def beta_at(self, s):
        s = np.asarray(s, dtype=float)
        if self.const_beta is not None:
            return np.full(s.shape, float(self.const_beta))[()]
        return beta(self.rate, self.weights, s)

    def xi(self, s, t):
        return np.asarray(s, dtype=float) - self.sigma * self.wave_number * np.asarray(t, dtype=float)


def _amplitude(p: NlsParams, s, sign: float):
    """sqrt(sign * sigma / beta), with sign = -1 for sn/tanh and +1 for cn/sech."""
    b = np.asarray(p.beta_at(s), dtype=float)
    if np.any(b == 0):
        raise SingularPotentialError("beta = 0 at an evaluation point")
    radicand = sign * p.sigma / b
    if p.magnitude_mode:
        return np.sqrt(np.abs(radicand))
    if np.any(radicand < 0):
        need = "negative" if sign < 0 else "positive"
        raise RadicandSignError(f"this branch needs {need} beta; enable magnitude_mode to use sqrt|sigma/beta|")
    return np.sqrt(radicand)


def _carrier(p: NlsParams, s, t, freq_factor: float):
    k = p.wave_number
    return np.exp(1j * (k * np.asarray(s, dtype=float) - 0.5 * p.sigma * np.asarray(t, dtype=float) * freq_factor))


def psi_sn(s, t, p: NlsParams):
    m = p.modulus
    if m >= 1.0:
        raise ValueError("psi_sn needs m < 1; use psi_shock for m = 1")
    sn = jacobi_sncndn(p.xi(s, t), m * m)[0]
    amp = p.branch * m * _amplitude(p, s, -1.0)
    return amp * sn * _carrier(p, s, t, 1.0 + m * m + p.wave_number**2)


def psi_shock(s, t, p: NlsParams):
    amp = p.branch * _amplitude(p, s, -1.0)
    return amp * np.tanh(p.xi(s, t)) * _carrier(p, s, t, 2.0 + p.wave_number**2)


def psi_cn(s, t, p: NlsParams):
    m = p.modulus
    if m >= 1.0:
        raise ValueError("psi_cn needs m < 1; use psi_soliton for m = 1")
    cn = jacobi_sncndn(p.xi(s, t), m * m)[1]
    amp = p.branch * m * _amplitude(p, s, 1.0)
    return amp * cn * _carrier(p, s, t, 1.0 - 2.0 * m * m + p.wave_number**2)


def psi_soliton(s, t, p: NlsParams):
    amp = p.branch * _amplitude(p, s, 1.0)
    return amp / np.cosh(p.xi(s, t)) * _carrier(p, s, t, p.wave_number**2 - 1.0)


def oscillator_residual(phi, ds: float, omega: float, p: NlsParams) -> float:
    """Max-norm residual of (sigma/2) phi'' + (omega - sigma k^2/2) phi + beta phi^3.

    The sigma/2 factor on phi'' is what substituting the travelling-wave
    ansatz into the NLS actually produces. Requires a constant beta.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.size < 3:
        raise ValueError("need at least 3 samples")
    if p.const_beta is None:
        raise ValueError("oscillator residual needs a constant beta")
    d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / ds**2
    core = phi[1:-1]
    res = (0.5 * p.sigma * d2 + (omega - 0.5 * p.sigma * p.wave_number**2) * core
           + p.const_beta * core**3)
    return float(np.max(np.abs(res)))


def _pdf_scale(s, p: NlsParams):
    b = np.asarray(p.beta_at(s), dtype=float)
    if np.any(b == 0):
        raise SingularPotentialError("beta = 0 at an evaluation point")
    return p.sigma / np.abs(b)


def spatial_pdf_shock(s, p: NlsParams, t: float):
    """|sqrt(sigma/beta) tanh(s - k t sigma)|^2; magnitude is implied by |.|^2."""
    return _pdf_scale(s, p) * np.tanh(p.xi(s, t)) ** 2


@dataclass(frozen=True)
class BlendCoefficients:
    d1: float = 1.0
    d2: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.d1) and np.isfinite(self.d2)):
            raise ValueError("blend coefficients must be finite")
        if self.d1 == 0 and self.d2 == 0:
            raise ValueError("blend coefficients cannot both be zero")


def spatial_pdf_blend(s, p: NlsParams, t: float, d: BlendCoefficients):
    xi = p.xi(s, t)
    return _pdf_scale(s, p) * (d.d1 * np.tanh(xi) + d.d2 / np.cosh(xi)) ** 2


def beta_zero_nodes(s, p: NlsParams) -> np.ndarray:
    """Indices where beta vanishes (the PDFs are singular there)."""
    return np.flatnonzero(np.asarray(p.beta_at(s)) == 0)
