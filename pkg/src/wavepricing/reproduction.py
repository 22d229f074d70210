"""Published fits: coefficient tables and the four reproduction cases."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .black_scholes import OptionKind, bs_curve
from .fitting import (FitResult, LMOptions, NlsPdfLayout, fit_nls_to_bs, fit_packet_to_bs,
                      kink_location, packet_from_theta, packet_names, packet_objective)
from .market import OptionParams, SpatialGrid, make_grid
from .nls import WeightSet
from .quantum import packet_pdf

DEFAULT_GRID = (75.0, 140.0, 128)
DEFAULT_MAX_ITER = 100

PUT_N7 = {
    "sigma": -0.0031891,
    "t": -0.0031891,
    "k": [2.62771, 2.62777, 2.65402, 2.61118, 2.64104, 2.54737, 2.62778],
    "c": [1.26632, 1.26517, 2.74379, 1.35495, 1.59586, 0.263832, 1.26779],
    "scaling": {"sigma_bs_per_sigma_star": -94.0705, "t_bs_per_t_star": -31.3568,
                "text": "sigma_BS = -94.0705 sigma*, t_BS = -31.3568 t*"},
}

CALL_N3 = {
    "sigma": -11.9245,
    "t": -11.9245,
    "k": [0.851858, 0.832409, 0.872061],
    "c": [2.9004, 2.72592, 2.93291],
    # The sigma relation has no equals sign in the source table; kept as is, unused.
    "scaling": {"sigma_bs_per_sigma_star": -0.0251583, "t_bs_per_t_star": -0.00838609,
                "text": "sigma_BS-0.0251583 sigma*, t=-0.00838609 t*"},
}


def implied_bs_values(table: dict) -> dict:
    sc = table["scaling"]
    return {"sigma_bs": sc["sigma_bs_per_sigma_star"] * table["sigma"],
            "t_bs": sc["t_bs_per_t_star"] * table["t"]}


def published_theta(table: dict) -> np.ndarray:
    return np.array([table["sigma"], table["t"], *table["k"], *table["c"]], dtype=float)


# Start points for the NLS fits (no coefficients are published for them).
# Two erf rows of opposite sign; kink position k*sigma*t inside the grid.
NLS_STARTS = {
    OptionKind.PUT: {"weights": ((10.0, 0.05, 1.0), (-10.0, 0.005, 1.0)), "kink_at": 110.0},
    OptionKind.CALL: {"weights": ((10.0, 0.05, 1.0), (-1.0, 0.005, 1.0)), "kink_at": 90.0},
}
NLS_SIGMA = 0.2
NLS_WAVE_NUMBER = 1.0


class Case(str, enum.Enum):
    NLS_CALL = "nls_call"
    NLS_PUT = "nls_put"
    PACKET_PUT_N7 = "packet_put_n7"
    PACKET_CALL_N3 = "packet_call_n3"


@dataclass
class Reproduction:
    case: Case
    fit: FitResult
    names: list
    s: np.ndarray
    target: np.ndarray
    model: np.ndarray
    metadata: dict = field(default_factory=dict)

    def report(self) -> dict:
        return {
            "case": self.case.value,
            "parameters": dict(zip(self.names, (float(x) for x in self.fit.theta))),
            "fit": self.fit.to_dict(),
            "metadata": self.metadata,
        }

    def overlay(self) -> np.ndarray:
        return np.column_stack([self.s, self.target, self.model])


def default_target(kind, params: OptionParams | None = None, grid: SpatialGrid | None = None):
    grid = grid or make_grid(*DEFAULT_GRID)
    params = params or OptionParams()
    return grid, bs_curve(grid, params, kind)


def packet_rmse(s, target, table: dict) -> float:
    n = len(table["k"])
    r = packet_objective(s, target, n).residual(published_theta(table))
    return float(np.sqrt(np.mean(r**2)))


def nls_start(kind: OptionKind, layout: NlsPdfLayout) -> np.ndarray:
    st = NLS_STARTS[kind]
    t0 = st["kink_at"] / (NLS_WAVE_NUMBER * NLS_SIGMA)
    return layout.pack(NLS_SIGMA, NLS_WAVE_NUMBER, t0, WeightSet(st["weights"]))


def _nls_case(case: Case, kind: OptionKind, params: OptionParams, grid, opts: LMOptions):
    grid, target = default_target(kind, params, grid)
    s = grid.nodes
    layout = NlsPdfLayout(2, "shock")
    shock = fit_nls_to_bs(s, target, layout, nls_start(kind, layout), params.rate, opts)
    meta = {"model": "shock", "start": [float(x) for x in nls_start(kind, layout)],
            "named_parameters": shock.params(), "option_params": params.__dict__}
    if kind is OptionKind.PUT:
        # The blend nests the shock model; start it from the shock optimum with d2 = 0.
        blend = fit_nls_to_bs(s, target, NlsPdfLayout(2, "blend"), shock.full, params.rate, opts)
        loc = kink_location(s, shock.curve(s), target)
        meta.update({
            "kink_location": loc,
            "kink_near_strike": bool(abs(loc - params.strike) <= 0.2 * params.strike),
            "blend": {"rmse": blend.result.rmse, "named_parameters": blend.params(),
                      "kink_location": kink_location(s, blend.curve(s), target)},
        })
    names = [layout.names[i] for i in layout.free_index()]
    return Reproduction(case, shock.result, names, s, target, shock.curve(s), meta)


def _packet_case(case: Case, kind: OptionKind, table: dict, params: OptionParams, grid, opts: LMOptions):
    grid, target = default_target(kind, params, grid)
    s = grid.nodes
    n = len(table["k"])
    theta0 = published_theta(table)
    anchor = packet_rmse(s, target, table)
    fit = fit_packet_to_bs(s, target, n, theta0, opts)
    basis, t = packet_from_theta(fit.theta, n)
    implied = implied_bs_values(table)
    meta = {
        "published_coefficients": {k: table[k] for k in ("sigma", "t", "k", "c")},
        "published_scaling": table["scaling"],
        "implied_bs": implied,
        "rmse_at_published_coefficients": anchor,
        "option_params": params.__dict__,
    }
    if kind is OptionKind.PUT:
        alt = OptionParams(volatility=round(implied["sigma_bs"], 6), maturity=round(implied["t_bs"], 6), rate=0.0)
        meta["rmse_at_published_coefficients_implied_target"] = packet_rmse(
            s, bs_curve(grid, alt, kind), table)
        meta["implied_target_params"] = alt.__dict__
    return Reproduction(case, fit, packet_names(n), s, target, packet_pdf(s, t, basis), meta)


def reproduce_paper_fit(case, params: OptionParams | None = None, grid: SpatialGrid | None = None,
                        opts: LMOptions = LMOptions(max_iter=DEFAULT_MAX_ITER)) -> Reproduction:
    case = Case(case)
    params = params or OptionParams()
    if case is Case.NLS_CALL:
        return _nls_case(case, OptionKind.CALL, params, grid, opts)
    if case is Case.NLS_PUT:
        return _nls_case(case, OptionKind.PUT, params, grid, opts)
    if case is Case.PACKET_PUT_N7:
        return _packet_case(case, OptionKind.PUT, PUT_N7, params, grid, opts)
    return _packet_case(case, OptionKind.CALL, CALL_N3, params, grid, opts)
