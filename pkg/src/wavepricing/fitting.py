"""Levenberg-Marquardt least squares and the harnesses that fit wave-model PDFs
to Black-Scholes price curves."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .nls import BlendCoefficients, NlsParams, SingularPotentialError, WeightSet, spatial_pdf_blend
from .quantum import PlaneWaveBasis, packet_pdf, packet_pdf_jacobian

log = logging.getLogger(__name__)


class FitError(RuntimeError):
    pass


@dataclass
class Objective:
    residual: Callable[[np.ndarray], np.ndarray]
    n_params: int
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_rel_step: float = 1e-6
    # Optional per-parameter step rule theta -> h; overrides fd_rel_step.
    fd_steps: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def fd_jacobian(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.fd_steps is not None:
            steps = np.asarray(self.fd_steps(theta), dtype=float)
        else:
            steps = self.fd_rel_step * np.maximum(1.0, np.abs(theta))
        cols = []
        for j in range(theta.size):
            h = steps[j]
            up = theta.copy()
            dn = theta.copy()
            up[j] += h
            dn[j] -= h
            cols.append((self.residual(up) - self.residual(dn)) / (2.0 * h))
        return np.column_stack(cols)

    def jac(self, theta: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(theta), dtype=float)
        return self.fd_jacobian(theta)


@dataclass(frozen=True)
class LMOptions:
    max_iter: int = 100
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    gtol: float = 1e-12
    ftol: float = 1e-14
    lambda_max: float = 1e16


@dataclass
class FitResult:
    theta: np.ndarray
    rmse: float
    iterations: int
    converged: bool
    status: str
    residual_history: list = field(default_factory=list)
    lambda_history: list = field(default_factory=list)
    n_evals: int = 0

    @property
    def cost(self) -> float:
        return self.residual_history[-1]

    def to_dict(self) -> dict:
        return {
            "theta": [float(x) for x in self.theta],
            "rmse": self.rmse,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
            "residual_history": [float(x) for x in self.residual_history],
            "lambda_history": [float(x) for x in self.lambda_history],
        }


def _cost(r: np.ndarray) -> float:
    return 0.5 * float(r @ r)


def levenberg_marquardt(obj: Objective, theta0, opts: LMOptions = LMOptions()) -> FitResult:
    """Classic Marquardt iteration on (J^T J + lambda diag(J^T J)) delta = -J^T r.

    ``residual_history`` holds the cost 0.5*|r|^2 after each iteration (one
    entry per iteration plus the start); ``lambda_history`` the damping used.
    """
    theta = np.array(theta0, dtype=float)
    if theta.size != obj.n_params:
        raise ValueError(f"theta0 has {theta.size} entries, objective expects {obj.n_params}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta0 must be finite")
    r = np.asarray(obj.residual(theta), dtype=float)
    if not np.all(np.isfinite(r)):
        raise FitError("residuals are not finite at theta0")
    if r.size < theta.size:
        raise ValueError("fewer residuals than parameters")

    cost = _cost(r)
    lam = opts.lambda0
    history = [cost]
    lambdas = [lam]
    n_evals = 1
    status = "max_iter"
    converged = False
    it = 0
    while it < opts.max_iter:
        if cost == 0.0:
            status, converged = "zero_residual", True
            break
        J = obj.jac(theta)
        g = J.T @ r
        if np.max(np.abs(g)) < opts.gtol:
            status, converged = "gtol", True
            break
        it += 1
        A = J.T @ J
        diag = np.maximum(np.diag(A), np.finfo(float).tiny)
        accepted = False
        while lam <= opts.lambda_max:
            try:
                delta = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam = max(lam, 1e-12) * opts.lambda_up
                continue
            trial = theta + delta
            r_trial = np.asarray(obj.residual(trial), dtype=float)
            n_evals += 1
            new_cost = _cost(r_trial) if np.all(np.isfinite(r_trial)) else math.inf
            if new_cost < cost:
                accepted = True
                break
            lam = max(lam, 1e-12) * opts.lambda_up
        if not accepted:
            status = "lambda_cap"
            history.append(cost)
            lambdas.append(lam)
            break
        rel_change = (cost - new_cost) / cost
        theta, r, cost = trial, r_trial, new_cost
        lam /= opts.lambda_down
        history.append(cost)
        lambdas.append(lam)
        if rel_change < opts.ftol:
            status, converged = "ftol", True
            break
    rmse = math.sqrt(2.0 * cost / r.size)
    return FitResult(theta, rmse, it, converged, status, history, lambdas, n_evals)


def jacobian_mismatch(obj: Objective, theta) -> float:
    """Largest column-wise relative difference between the analytic and central-FD Jacobian."""
    theta = np.asarray(theta, dtype=float)
    ja = obj.jac(theta)
    jf = obj.fd_jacobian(theta)
    scale = np.max(np.abs(jf), axis=0)
    scale[scale == 0] = 1.0
    return float(np.max(np.max(np.abs(ja - jf), axis=0) / scale))


# ------------------------------------------------------------ NLS-PDF models

class NlsModel(str, enum.Enum):
    SHOCK = "shock"
    BLEND = "blend"


@dataclass(frozen=True)
class NlsPdfLayout:
    """Parameter vector [sigma, k, t, (w1, w2, w3) * n_rows, d1, d2] and its free mask.

    sigma, k and t only enter through the kink position k*sigma*t (and sigma
    also through the amplitude, where it trades off against w1), and w2/w3
    only as a ratio; by default sigma, k, w3 and d1 are held fixed.
    """
    n_rows: int
    model: NlsModel = NlsModel.SHOCK
    free: tuple = ()

    def __post_init__(self):
        if self.n_rows < 1:
            raise ValueError("need at least one weight row")
        object.__setattr__(self, "model", NlsModel(self.model))
        if not self.free:
            mask = [False, False, True] + [True, True, False] * self.n_rows
            mask += [False, self.model is NlsModel.BLEND]
            object.__setattr__(self, "free", tuple(mask))
        if len(self.free) != self.size:
            raise ValueError(f"free mask needs {self.size} entries")

    @property
    def size(self) -> int:
        return 3 + 3 * self.n_rows + 2

    @property
    def names(self) -> list[str]:
        out = ["sigma", "k", "t"]
        for i in range(1, self.n_rows + 1):
            out += [f"w1_{i}", f"w2_{i}", f"w3_{i}"]
        return out + ["d1", "d2"]

    def pack(self, sigma, k, t, weights: WeightSet, d: BlendCoefficients = BlendCoefficients()) -> np.ndarray:
        flat = [v for row in weights.rows for v in row]
        return np.array([sigma, k, t, *flat, d.d1, d.d2], dtype=float)

    def unpack(self, full: np.ndarray):
        sigma, k, t = full[:3]
        weights = WeightSet.from_flat(full[3:3 + 3 * self.n_rows])
        d = BlendCoefficients(full[-2], full[-1])
        return float(sigma), float(k), float(t), weights, d

    def free_index(self) -> np.ndarray:
        return np.flatnonzero(self.free)


def nls_pdf(s, full: np.ndarray, layout: NlsPdfLayout, rate: float) -> np.ndarray:
    sigma, k, t, weights, d = layout.unpack(full)
    if layout.model is NlsModel.SHOCK:
        d = BlendCoefficients(1.0, 0.0)
    p = NlsParams(sigma=sigma, rate=rate, wave_number=k,
                  weights=weights, magnitude_mode=True)
    return spatial_pdf_blend(s, p, t, d)


def _normalize(y: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(y))
    return y / peak if peak > 0 else y


def nls_objective(s, target, layout: NlsPdfLayout, full0: np.ndarray, rate: float,
                  normalize: bool = False) -> Objective:
    s = np.asarray(s, dtype=float)
    target = np.asarray(target, dtype=float)
    if not np.all(np.isfinite(target)):
        raise ValueError("target must be finite")
    tgt = _normalize(target) if normalize else target
    idx = layout.free_index()
    base = np.array(full0, dtype=float)

    def residual(theta):
        full = base.copy()
        full[idx] = theta
        try:
            model = nls_pdf(s, full, layout, rate)
        except (SingularPotentialError, ValueError):
            return np.full(s.size, np.inf)
        if normalize:
            model = _normalize(model)
        return model - tgt

    return Objective(residual, idx.size)


@dataclass
class NlsFit:
    result: FitResult
    layout: NlsPdfLayout
    full: np.ndarray
    rate: float

    def params(self) -> dict:
        return dict(zip(self.layout.names, (float(x) for x in self.full)))

    def curve(self, s) -> np.ndarray:
        return nls_pdf(s, self.full, self.layout, self.rate)


def fit_nls_to_bs(s, target, layout: NlsPdfLayout, full0, rate: float,
                  opts: LMOptions = LMOptions(), normalize: bool = False) -> NlsFit:
    full0 = np.asarray(full0, dtype=float)
    # Validates w3 != 0 and the blend coefficients up front.
    layout.unpack(full0)
    obj = nls_objective(s, target, layout, full0, rate, normalize)
    idx = layout.free_index()
    res = levenberg_marquardt(obj, full0[idx], opts)
    full = full0.copy()
    full[idx] = res.theta
    return NlsFit(res, layout, full, rate)


# ------------------------------------------------------------ packet model

def packet_theta(basis: PlaneWaveBasis, t: float) -> np.ndarray:
    return np.concatenate([[basis.sigma, t], basis.k, basis.c])


def packet_from_theta(theta: np.ndarray, n: int) -> tuple[PlaneWaveBasis, float]:
    theta = np.asarray(theta, dtype=float)
    basis = PlaneWaveBasis.from_arrays(theta[0], theta[2:2 + n], theta[2 + n:2 + 2 * n], strict=False)
    return basis, float(theta[1])


def packet_names(n: int) -> list[str]:
    return ["sigma", "t"] + [f"k_{i}" for i in range(1, n + 1)] + [f"c_{i}" for i in range(1, n + 1)]


def packet_objective(s, target, n: int, normalize: bool = False) -> Objective:
    s = np.asarray(s, dtype=float)
    target = np.asarray(target, dtype=float)
    if not np.all(np.isfinite(target)):
        raise ValueError("target must be finite")
    tgt = _normalize(target) if normalize else target

    def residual(theta):
        basis, t = packet_from_theta(theta, n)
        model = packet_pdf(s, t, basis)
        if normalize:
            model = _normalize(model)
        return model - tgt

    def analytic_jac(theta):
        basis, t = packet_from_theta(theta, n)
        return packet_pdf_jacobian(s, t, basis)

    jac = None if normalize else analytic_jac

    s_max = float(np.max(np.abs(s)))

    def fd_steps(theta, dphi=1e-4):
        # sigma, t and k only enter through phases that can be large (k*s ~ 1e2),
        # so their steps are sized to move the largest phase by ~dphi radians.
        sigma, t = theta[0], theta[1]
        k = theta[2:2 + n]
        k2 = float(np.max(k * k))
        tiny = np.finfo(float).tiny
        h = np.empty_like(theta)
        h[0] = dphi / max(0.5 * abs(t) * k2, tiny)
        h[1] = dphi / max(0.5 * abs(sigma) * k2, tiny)
        h[2:2 + n] = dphi / np.maximum(s_max + np.abs(sigma * t * k), tiny)
        h[2 + n:] = 1e-6 * np.maximum(1.0, np.abs(theta[2 + n:]))
        return np.minimum(h, 1e-2 * np.maximum(1.0, np.abs(theta)))

    return Objective(residual, 2 + 2 * n, jac, fd_steps=fd_steps)


def fit_packet_to_bs(s, target, n: int, theta0, opts: LMOptions = LMOptions(),
                     normalize: bool = False) -> FitResult:
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.size != 2 + 2 * n:
        raise ValueError(f"packet fit with n={n} needs {2 + 2 * n} parameters")
    return levenberg_marquardt(packet_objective(s, target, n, normalize), theta0, opts)


def kink_location(s, model, target) -> float:
    """Node where the slopes of model and target disagree most."""
    s = np.asarray(s, dtype=float)
    mismatch = np.abs(np.gradient(model, s) - np.gradient(target, s))
    return float(s[int(np.argmax(mismatch))])


def flat_packet_start(target) -> np.ndarray:
    """n = 1 start: the constant sqrt(mean) amplitude."""
    return np.array([1.0, 0.0, 0.0, math.sqrt(max(float(np.mean(target)), 0.0))])


def summarize(values: Sequence[float]) -> dict:
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}
