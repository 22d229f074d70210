"""Residual and split-step convergence tables for the closed-form solutions.

    python3 scripts/convergence.py --out out/convergence
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wavepricing.black_scholes import OptionKind, price_surface
from wavepricing.io import write_csv
from wavepricing.manakov import SolitonSpec, manakov_soliton
from wavepricing.market import OptionParams, WaveField, periodic_grid
from wavepricing.nls import NlsParams, psi_shock, psi_soliton
from wavepricing.propagator import (BlackScholesPDE, EvolutionSpec, FreeSchrodinger, Manakov, Nls, observed_orders,
                                    pde_residual, split_step_evolve)
from wavepricing.quantum import GaussianPacketSpec, gaussian_packet


@dataclass
class ConvergenceConfig:
    lattice_sizes: tuple = (21, 41, 81, 161)
    split_steps: tuple = (1e-3, 5e-4, 2.5e-4, 1.25e-4)
    t_final: float = 1.0


def residual_table(cfg: ConvergenceConfig):
    bs = OptionParams()
    shock = NlsParams(sigma=0.5, const_beta=-0.5, wave_number=1.0, modulus=1.0)
    sol = NlsParams(sigma=0.5, const_beta=0.5, wave_number=1.0, modulus=1.0)
    gauss = GaussianPacketSpec(width=1.0, s0=0.5, p0=1.0)
    vec = SolitonSpec(0.2, 0.5, (0.6, 0.8))
    cases = {
        "bs_call": (lambda s, t: price_surface(s, t, bs, OptionKind.CALL), BlackScholesPDE(0.2, 0.05), (80, 120)),
        "psi2": (lambda s, t: np.vstack([psi_shock(s, ti, shock) for ti in t]), Nls(0.5, -0.5), (-3, 3)),
        "psi4": (lambda s, t: np.vstack([psi_soliton(s, ti, sol) for ti in t]), Nls(0.5, 0.5), (-3, 3)),
        "gaussian": (lambda s, t: np.vstack([gaussian_packet(s, ti, gauss, 0.7) for ti in t]),
                     FreeSchrodinger(0.7), (-3, 3)),
        "manakov": (lambda s, t: np.stack([np.vstack(manakov_soliton(s, ti, vec)) for ti in t], axis=1),
                    Manakov(), (-3, 3)),
    }
    rows = []
    for name, (fn, eq, s_range) in cases.items():
        errs = []
        for n in cfg.lattice_sizes:
            t = np.linspace(0.0, 0.5, n)
            s = np.linspace(*s_range, n)
            errs.append(pde_residual(fn(s, t), t, s, eq).linf)
        orders = observed_orders([1.0 / (n - 1) for n in cfg.lattice_sizes], errs)
        rows += [(name, n, e, o) for n, e, o in zip(cfg.lattice_sizes, errs, [np.nan, *orders])]
    return rows


def split_step_table(cfg: ConvergenceConfig):
    p = NlsParams(sigma=0.5, const_beta=0.5, wave_number=1.0)
    grid = periodic_grid(80.0, 1024)
    f0 = WaveField(grid, 0.0, psi_soliton(grid.nodes, 0.0, p))
    exact = psi_soliton(grid.nodes, cfg.t_final, p)
    errs = []
    for dt in cfg.split_steps:
        last = split_step_evolve(f0, EvolutionSpec(Nls(0.5, 0.5), dt, cfg.t_final, record_every=10**9))[-1]
        errs.append(float(np.max(np.abs(last.values - exact))))
    orders = [np.nan, *observed_orders(cfg.split_steps, errs)]
    return list(zip(cfg.split_steps, errs, orders))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/convergence"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = ConvergenceConfig()
    res = residual_table(cfg)
    with open(args.out / "residuals.csv", "w") as fh:
        fh.write("case,n,linf,order\n")
        for name, n, e, o in res:
            fh.write(f"{name},{n},{e!r},{o!r}\n")
            print(f"{name:9s} n={n:4d} residual={e:.3e} order={o:.3f}")
    ss = split_step_table(cfg)
    write_csv(args.out / "split_step.csv", ["dt", "max_error", "order"], ss)
    for dt, e, o in ss:
        print(f"split-step dt={dt:.1e} error={e:.3e} order={o:.3f}")


if __name__ == "__main__":
    main()
