"""Closed-form European option prices and Greeks (Black-Scholes-Merton with dividend yield).

Theta is the derivative with respect to *elapsed* time, i.e. minus the
derivative with respect to remaining maturity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .market import OptionParams, SpatialGrid
from .special import std_normal_cdf


class OptionKind(str, enum.Enum):
    CALL = "call"
    PUT = "put"


def _kind(kind) -> OptionKind:
    return kind if isinstance(kind, OptionKind) else OptionKind(str(kind).lower())


@dataclass(frozen=True)
class GreeksReport:
    delta: float
    rho: float
    vega: float
    theta: float
    gamma: float

    def as_dict(self) -> dict:
        return {"delta": self.delta, "rho": self.rho, "vega": self.vega,
                "theta": self.theta, "gamma": self.gamma}


def _normal_pdf(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _positive_spot(s):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError("spot price must be > 0")
    return s


def d1_d2(s, p: OptionParams):
    s = _positive_spot(s)
    vol_sqrt_t = p.volatility * math.sqrt(p.maturity)
    d1 = (np.log(s / p.strike)
          + p.maturity * (p.rate - p.dividend_yield + 0.5 * p.volatility**2)) / vol_sqrt_t
    d2 = d1 - vol_sqrt_t
    return d1, d2


def bs_price(s, p: OptionParams, kind=OptionKind.CALL):
    kind = _kind(kind)
    s = _positive_spot(s)
    d1, d2 = d1_d2(s, p)
    disc_s = s * math.exp(-p.dividend_yield * p.maturity)
    disc_k = p.strike * math.exp(-p.rate * p.maturity)
    if kind is OptionKind.CALL:
        price = disc_s * std_normal_cdf(d1) - disc_k * std_normal_cdf(d2)
    else:
        price = disc_k * std_normal_cdf(-d2) - disc_s * std_normal_cdf(-d1)
    # Rounding can leave tiny negatives deep out of the money.
    price = np.maximum(price, 0.0)
    return price[()] if np.ndim(price) == 0 else price


def bs_greeks(s: float, p: OptionParams, kind=OptionKind.CALL) -> GreeksReport:
    kind = _kind(kind)
    s = float(_positive_spot(s))
    d1, d2 = (float(x) for x in d1_d2(s, p))
    t = p.maturity
    sqrt_t = math.sqrt(t)
    q_disc = math.exp(-p.dividend_yield * t)
    r_disc = math.exp(-p.rate * t)
    pdf1 = float(_normal_pdf(d1))

    gamma = q_disc * pdf1 / (s * p.volatility * sqrt_t)
    vega = s * q_disc * pdf1 * sqrt_t
    decay = s * q_disc * pdf1 * p.volatility / (2.0 * sqrt_t)
    if kind is OptionKind.CALL:
        delta = q_disc * float(std_normal_cdf(d1))
        rho = p.strike * t * r_disc * float(std_normal_cdf(d2))
        dprice_dmaturity = (decay - p.dividend_yield * s * q_disc * float(std_normal_cdf(d1))
                            + p.rate * p.strike * r_disc * float(std_normal_cdf(d2)))
    else:
        delta = -q_disc * float(std_normal_cdf(-d1))
        rho = -p.strike * t * r_disc * float(std_normal_cdf(-d2))
        dprice_dmaturity = (decay + p.dividend_yield * s * q_disc * float(std_normal_cdf(-d1))
                            - p.rate * p.strike * r_disc * float(std_normal_cdf(-d2)))
    return GreeksReport(delta=delta, rho=rho, vega=vega, theta=-dprice_dmaturity, gamma=gamma)


def bs_curve(grid: SpatialGrid, p: OptionParams, kind=OptionKind.CALL) -> np.ndarray:
    """Prices on every grid node; s = 0 nodes take the analytic limit."""
    kind = _kind(kind)
    if grid.s_min < 0:
        raise ValueError("price grid must start at s >= 0")
    s = grid.nodes
    out = np.empty_like(s)
    zero = s == 0.0
    if kind is OptionKind.CALL:
        out[zero] = 0.0
    else:
        out[zero] = p.strike * math.exp(-p.rate * p.maturity)
    out[~zero] = bs_price(s[~zero], p, kind)
    return out


def price_surface(s: np.ndarray, elapsed: np.ndarray, p: OptionParams, kind=OptionKind.CALL):
    """u(t, s) on an (elapsed time, spot) lattice; rows are times."""
    rows = [bs_price(s, p.replace(maturity=p.maturity - t), kind) for t in elapsed]
    return np.vstack(rows)
