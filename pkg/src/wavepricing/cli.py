"""Command-line entry point.

    wavepricing <command> [--config cfg.json] [--out DIR] [--seed N] [--format csv|json]

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
Every command writes ``manifest.json`` (config, config hash, seed, files, results)
next to its data files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .black_scholes import OptionKind, bs_curve, bs_greeks, bs_price
from .fitting import (FitError, LMOptions, NlsPdfLayout, fit_nls_to_bs, fit_packet_to_bs,
                      flat_packet_start, packet_from_theta, packet_names)
from .io import config_hash, write_csv, write_curves, write_field, write_frames, write_json
from .manakov import (SolitonSpec, collision_initial_condition, count_peaks, manakov_soliton,
                      peak_positions, soliton_state)
from .market import OptionParams, WaveField, make_grid, periodic_grid, simulate_gbm_terminal
from .nls import NlsParams, WeightSet, psi_cn, psi_shock, psi_sn, psi_soliton
from .propagator import (EvolutionSpec, FreeSchrodinger, Manakov, Nls, NumericalDivergence,
                         conserved_quantities, max_drift, split_step_evolve)
from .quantum import GaussianPacketSpec, PlaneWaveBasis, gaussian_packet, packet_pdf, quantum_greeks, wave_packet
from .reproduction import DEFAULT_GRID, Case, default_target, nls_start, reproduce_paper_fit

log = logging.getLogger("wavepricing")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("bs-curve", "nls-eval", "packet-eval", "fit", "evolve", "greeks", "reproduce")


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def load_schema(name: str = "config") -> dict:
    text = resources.files("wavepricing").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_config(config: dict):
    validator = jsonschema.Draft202012Validator(load_schema("config"))
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("schema validation failed:\n  " + "\n  ".join(lines))


def _finite(x, what: str):
    if not np.all(np.isfinite(np.asarray(x))):
        raise NumericalFailure(f"non-finite values in {what}")
    return x


def _ext(fmt: str) -> str:
    return "json" if fmt == "json" else "csv"


class Run:
    """Per-invocation context: config, output directory, format and the file list."""

    def __init__(self, command: str, config: dict, out: Path, fmt: str, seed: int):
        self.command = command
        self.config = config
        self.out = out
        self.fmt = fmt
        self.seed = seed
        self.files: list[str] = []

    def path(self, stem: str, ext: str | None = None) -> Path:
        name = f"{stem}.{ext or _ext(self.fmt)}"
        self.files.append(name)
        return self.out / name

    def grid(self, default=DEFAULT_GRID):
        g = self.config.get("grid", {})
        return make_grid(g.get("s_min", default[0]), g.get("s_max", default[1]), g.get("n", default[2]))

    def option(self) -> OptionParams:
        return OptionParams(**self.config.get("option", {}))

    def manifest(self, results: dict):
        body = {
            "command": self.command,
            "config": self.config,
            "config_hash": config_hash(self.config),
            "seed": self.seed,
            "format": self.fmt,
            "files": list(self.files),
            "results": results,
            "version": __version__,
        }
        write_json(self.out / "manifest.json", body)


# ---------------------------------------------------------------- commands

def cmd_bs_curve(run: Run) -> dict:
    grid = run.grid()
    p = run.option()
    kinds = [OptionKind(k) for k in run.config.get("kinds", ["put", "call"])]
    opts = run.config.get("bs", {})
    curves = {k.value: _finite(bs_curve(grid, p, k), f"{k.value} curve") for k in kinds}
    write_curves(run.path("curves"), grid.nodes, curves, run.fmt)
    if opts.get("greeks", True):
        cols = {}
        for k in kinds:
            reports = [bs_greeks(s, p, k).as_dict() for s in grid.nodes]
            for name in ("delta", "rho", "vega", "theta", "gamma"):
                cols[f"{k.value}_{name}"] = _finite([r[name] for r in reports], "greeks")
        write_curves(run.path("greeks"), grid.nodes, cols, run.fmt)
    results = {"grid": grid.to_dict(), "option": p.__dict__,
               "endpoints": {k: [float(v[0]), float(v[-1])] for k, v in curves.items()}}
    if "mc_paths" in opts:
        terminal = simulate_gbm_terminal(p.strike, p.rate - p.dividend_yield, p.volatility,
                                         p.maturity, opts["mc_paths"], run.seed)
        disc = math.exp(-p.rate * p.maturity)
        mc = {}
        for k in kinds:
            payoff = np.maximum(terminal - p.strike, 0.0) if k is OptionKind.CALL else np.maximum(p.strike - terminal, 0.0)
            mc[k.value] = {"spot": p.strike, "mc_price": float(disc * payoff.mean()),
                           "std_error": float(disc * payoff.std(ddof=1) / math.sqrt(payoff.size)),
                           "closed_form": float(bs_price(p.strike, p, k))}
        results["monte_carlo"] = mc
    return results


SOLUTIONS = {"sn": psi_sn, "shock": psi_shock, "cn": psi_cn, "soliton": psi_soliton}


def _nls_params(cfg: dict) -> NlsParams:
    weights = WeightSet(tuple(tuple(r) for r in cfg["weights"])) if "weights" in cfg else None
    const_beta = cfg.get("beta")
    if weights is None and const_beta is None:
        const_beta = 1.0
    return NlsParams(sigma=cfg.get("sigma", 0.2), rate=cfg.get("rate", 0.05),
                     wave_number=cfg.get("wave_number", 1.0), modulus=cfg.get("modulus", 0.5),
                     weights=weights, const_beta=const_beta, branch=cfg.get("branch", 1),
                     magnitude_mode=cfg.get("magnitude_mode", False))


def cmd_nls_eval(run: Run) -> dict:
    cfg = run.config.get("nls", {})
    grid = run.grid((-20.0, 20.0, 256))
    p = _nls_params(cfg)
    t = cfg.get("t", 0.0)
    solution = cfg.get("solution", "soliton")
    values = _finite(SOLUTIONS[solution](grid.nodes, t, p), "NLS solution")
    field = WaveField(grid, t, values)
    write_field(run.path("field"), field, run.fmt)
    return {"solution": solution, "time": t, "norm": field.norm(),
            "max_density": float(field.density().max())}


def _basis(cfg: dict) -> tuple[PlaneWaveBasis, float]:
    k = cfg.get("k", [1.0])
    c = cfg.get("c", [1.0])
    if len(k) != len(c):
        raise ConfigError(f"packet needs as many amplitudes as wave numbers ({len(k)} vs {len(c)})")
    basis = PlaneWaveBasis.from_arrays(cfg.get("sigma", 0.2), k, c,
                                       strict=not cfg.get("allow_negative_sigma", False))
    return basis, float(cfg.get("t", 0.0))


def cmd_packet_eval(run: Run) -> dict:
    basis, t = _basis(run.config.get("packet", {}))
    grid = run.grid()
    pdf = _finite(packet_pdf(grid.nodes, t, basis), "packet PDF")
    write_curves(run.path("pdf"), grid.nodes, {"pdf": pdf}, run.fmt)
    write_field(run.path("field"), WaveField(grid, t, wave_packet(grid.nodes, t, basis)), run.fmt)
    return {"n": basis.n, "time": t, "pdf_max": float(pdf.max()), "pdf_mean": float(pdf.mean())}


def cmd_greeks(run: Run) -> dict:
    basis, _ = _basis(run.config.get("packet", {}))
    grid = run.grid()
    times = run.config.get("greeks", {}).get("t", [0.0, 0.25, 0.5, 0.75, 1.0])
    rows = []
    worst = 0.0
    for t in times:
        g = quantum_greeks(basis, grid.nodes, t)
        for name in ("delta", "vega", "theta", "gamma"):
            _finite(getattr(g, name), f"greek {name}")
        worst = max(worst, float(np.max(np.abs(t * g.theta - basis.sigma * g.vega))))
        rows += list(zip([t] * grid.n_points, grid.nodes, g.delta, g.vega, g.theta, g.gamma))
    header = ["t", "s", "delta", "vega", "theta", "gamma"]
    path = run.path("greeks")
    if run.fmt == "json":
        write_json(path, {h: [float(r[i]) for r in rows] for i, h in enumerate(header)})
    else:
        write_csv(path, header, rows)
    return {"n_rows": len(rows), "max_theta_vega_identity_gap": worst}


def _lm(cfg: dict) -> LMOptions:
    return LMOptions(**cfg.get("lm", {}))


def _write_report(run: Run, stem: str, report: dict, s, target, model):
    write_json(run.path(f"report_{stem}", "json"), report)
    write_curves(run.path(f"overlay_{stem}"), s, {"target": target, "model": model}, run.fmt)


def cmd_fit(run: Run) -> dict:
    cfg = run.config.get("fit", {})
    opts = _lm(cfg)
    if "case" in cfg:
        rep = reproduce_paper_fit(cfg["case"], run.option(), run.grid(), opts)
        _finite(rep.model, "fitted curve")
        _write_report(run, rep.case.value, rep.report(), rep.s, rep.target, rep.model)
        return {rep.case.value: {"rmse": rep.fit.rmse, "status": rep.fit.status}}

    kind = OptionKind(cfg.get("kind", "put"))
    p = run.option()
    grid, target = default_target(kind, p, run.grid())
    s = grid.nodes
    harness = cfg.get("harness", "packet")
    normalize = cfg.get("normalize", False)
    if harness == "packet":
        theta0 = cfg.get("theta0")
        n = cfg.get("n", 1 if theta0 is None else (len(theta0) - 2) // 2)
        if theta0 is None:
            if n != 1:
                raise ConfigError("packet fits with n > 1 need theta0")
            theta0 = flat_packet_start(target)
        if len(theta0) != 2 + 2 * n:
            raise ConfigError(f"packet fit with n={n} needs {2 + 2 * n} start values, got {len(theta0)}")
        res = fit_packet_to_bs(s, target, n, theta0, opts, normalize)
        basis, t = packet_from_theta(res.theta, n)
        model = packet_pdf(s, t, basis)
        names = packet_names(n)
        meta = {"harness": "packet", "kind": kind.value, "n": n, "theta0": [float(x) for x in theta0]}
    else:
        layout = NlsPdfLayout(2 if "theta0" not in cfg else (len(cfg["theta0"]) - 5) // 3,
                              cfg.get("model", "shock"))
        full0 = np.asarray(cfg["theta0"], dtype=float) if "theta0" in cfg else nls_start(kind, layout)
        if full0.size != layout.size:
            raise ConfigError(f"NLS theta0 must have 3 + 3*rows + 2 entries, got {full0.size}")
        fit = fit_nls_to_bs(s, target, layout, full0, p.rate, opts, normalize)
        res = fit.result
        model = fit.curve(s)
        names = [layout.names[i] for i in layout.free_index()]
        meta = {"harness": "nls", "model": layout.model.value, "kind": kind.value,
                "named_parameters": fit.params(), "start": [float(x) for x in full0]}
    if normalize:
        meta["normalized"] = True
    _finite(model, "fitted curve")
    report = {"case": f"custom_{harness}", "parameters": dict(zip(names, map(float, res.theta))),
              "fit": res.to_dict(), "metadata": meta}
    _write_report(run, f"custom_{harness}", report, s, target, model)
    return {f"custom_{harness}": {"rmse": res.rmse, "status": res.status, "iterations": res.iterations}}


def cmd_reproduce(run: Run) -> dict:
    cfg = run.config.get("reproduce", {})
    cases = cfg.get("cases", [c.value for c in Case])
    opts = _lm(cfg)
    out = {}
    for case in cases:
        rep = reproduce_paper_fit(case, run.option(), run.grid(), opts)
        _finite(rep.model, "fitted curve")
        _write_report(run, rep.case.value, rep.report(), rep.s, rep.target, rep.model)
        summary = {"rmse": rep.fit.rmse, "status": rep.fit.status}
        if "rmse_at_published_coefficients" in rep.metadata:
            summary["rmse_at_published_coefficients"] = rep.metadata["rmse_at_published_coefficients"]
        if "kink_near_strike" in rep.metadata:
            summary["kink_location"] = rep.metadata["kink_location"]
            summary["kink_near_strike"] = rep.metadata["kink_near_strike"]
            summary["blend_rmse"] = rep.metadata["blend"]["rmse"]
        out[rep.case.value] = summary
    return out


# ------------------------------------------------------------------ evolve

EVOLVE_DEFAULTS = {
    "soliton": {"grid": {"length": 80.0, "n": 1024}, "sigma": 0.5, "beta": 0.5, "wave_number": 1.0,
                "dt": 1e-3, "t_final": 1.0, "record_every": 100},
    "manakov": {"grid": {"length": 120.0, "n": 1024}, "dt": 1e-3, "t_final": 1.0, "record_every": 100,
                "solitons": [{"a": 0.25, "b": 0.5, "c": [math.sqrt(0.5), math.sqrt(0.5)]}]},
    "collision": {"grid": {"length": 120.0, "n": 1024}, "dt": 1e-3, "t_final": 30.0, "record_every": 1000,
                  "solitons": [{"a": 0.5, "b": 0.5, "c": [1.0, 0.0], "offset": 15.0},
                               {"a": -0.5, "b": 0.5, "c": [0.0, 1.0], "offset": -15.0}]},
    "gaussian": {"grid": {"length": 40.0, "n": 256}, "sigma": 1.0, "beta": 0.0, "dt": 1e-3, "t_final": 1.0,
                 "record_every": 100,
                 "gaussian": {"width": 1.0, "s0": 0.0, "p0": 0.0}},
}


def _soliton_specs(cfg: dict):
    specs = [SolitonSpec(d["a"], d["b"], tuple(d.get("c", (1.0, 0.0)))) for d in cfg["solitons"]]
    offsets = [d.get("offset", 0.0) for d in cfg["solitons"]]
    return specs, offsets


def cmd_evolve(run: Run) -> dict:
    user = run.config.get("evolve", {})
    preset = user.get("preset", "soliton")
    cfg = {**EVOLVE_DEFAULTS[preset], **user}
    g = cfg["grid"]
    grid = periodic_grid(g.get("length", EVOLVE_DEFAULTS[preset]["grid"]["length"]),
                         g.get("n", EVOLVE_DEFAULTS[preset]["grid"]["n"]), g.get("center", 0.0))
    s = grid.nodes
    closed = None
    mk = {"dispersion": cfg.get("dispersion", 0.5), "coupling": cfg.get("coupling", 1.0)}

    if preset == "soliton":
        p = NlsParams(sigma=cfg["sigma"], wave_number=cfg["wave_number"], const_beta=cfg["beta"])
        initial = WaveField(grid, 0.0, psi_soliton(s, 0.0, p))
        equation = Nls(cfg["sigma"], cfg["beta"])
        closed = lambda t: psi_soliton(s, t, p)
    elif preset == "gaussian":
        packet = GaussianPacketSpec(**cfg["gaussian"])
        sigma = cfg["sigma"]
        initial = WaveField(grid, 0.0, gaussian_packet(s, 0.0, packet, sigma))
        beta = cfg.get("beta", 0.0)
        equation = FreeSchrodinger(sigma) if beta == 0 else Nls(sigma, beta)
        if beta == 0:
            closed = lambda t: gaussian_packet(s, t, packet, sigma)
    else:
        specs, offsets = _soliton_specs(cfg)
        equation = Manakov(beta=mk["coupling"], dispersion=mk["dispersion"])
        if preset == "manakov" and len(specs) == 1:
            initial = soliton_state(grid, 0.0, specs[0], offset=offsets[0], **mk)
            closed = lambda t: np.vstack(manakov_soliton(s, t, specs[0], offset=offsets[0], **mk))
        else:
            initial = collision_initial_condition(specs, offsets, grid, **mk)

    evo = EvolutionSpec(equation, cfg["dt"], cfg["t_final"], cfg.get("record_every", 1),
                        cfg.get("backward", False))
    try:
        frames = split_step_evolve(initial, evo)
    except NumericalDivergence as exc:
        raise NumericalFailure(str(exc)) from exc
    reports = conserved_quantities(frames, equation)
    write_frames(run.path("frames"), frames, run.fmt)
    results = {
        "preset": preset,
        "n_frames": len(frames),
        "final_time": float(frames[-1].time),
        "max_norm_drift": max_drift(reports, "norm"),
        "max_energy_drift": max_drift(reports, "energy"),
        "conserved": [r.as_dict() for r in reports],
    }
    last = frames[-1]
    if closed is not None:
        now = last.as_array() if hasattr(last, "as_array") else last.values
        results["max_error_vs_closed_form"] = float(np.max(np.abs(now - closed(last.time))))
    if preset == "collision":
        results.update(_collision_summary(frames))
    return results


def _collision_summary(frames) -> dict:
    first, last = frames[0], frames[-1]
    s = last.grid.nodes
    counts = [count_peaks(fr.total_power()) for fr in frames]

    def component_peaks(fr):
        return [float(s[int(np.argmax(f.density()))]) for f in (fr.sigma_field, fr.psi_field)]

    start, end = component_peaks(first), component_peaks(last)
    # Orthogonal polarizations keep each soliton in its own component, so
    # crossing shows up as the component peaks swapping order.
    crossed = (start[0] - start[1]) * (end[0] - end[1]) < 0
    return {
        "peak_counts": counts,
        "final_peak_positions": [float(x) for x in peak_positions(s, last.total_power())],
        "component_peaks_start": start,
        "component_peaks_end": end,
        "two_peak_reemergence": bool(counts[0] == 2 and counts[-1] == 2 and crossed),
    }


HANDLERS = {
    "bs-curve": cmd_bs_curve,
    "nls-eval": cmd_nls_eval,
    "packet-eval": cmd_packet_eval,
    "fit": cmd_fit,
    "evolve": cmd_evolve,
    "greeks": cmd_greeks,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavepricing", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="JSON run config")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    ap.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        validate_config(config)
        seed = int(config.get("seed", 0))
        args.out.mkdir(parents=True, exist_ok=True)
        run = Run(args.command, config, args.out, args.fmt, seed)
        results = HANDLERS[args.command](run)
        run.manifest(results)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, FitError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.command}: wrote {len(run.files) + 1} files to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
