"""CSV / JSON serialization for fields, paths, frame sequences, manifests and fit reports.

Floats are written with ``repr`` so files round-trip exactly and re-runs are
byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .manakov import ManakovState
from .market import GbmPath, SpatialGrid, WaveField


def _f(x) -> float:
    return float(x)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(_f(x)) for x in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)


# ------------------------------------------------------------------ fields

def field_to_envelope(field: WaveField) -> dict:
    g = field.grid
    return {
        "grid": {"s_min": _f(g.s_min), "s_max": _f(g.s_max), "n": int(g.n_points)},
        "time": _f(field.time),
        "values": [[_f(v.real), _f(v.imag)] for v in field.values],
    }


def field_from_envelope(env: dict) -> WaveField:
    g = env["grid"]
    grid = SpatialGrid(g["s_min"], g["s_max"], g["n"])
    vals = np.array([complex(re, im) for re, im in env["values"]])
    return WaveField(grid, env["time"], vals)


def write_field(path, field: WaveField, fmt: str = "csv"):
    if fmt == "json":
        write_json(path, field_to_envelope(field))
    else:
        write_csv(path, ["s", "re", "im"], zip(field.s, field.values.real, field.values.imag))


def read_field_csv(path, time: float = 0.0) -> WaveField:
    header, data = read_csv(path)
    if header != ["s", "re", "im"]:
        raise ValueError(f"unexpected field header {header}")
    s = data[:, 0]
    grid = SpatialGrid(float(s[0]), float(s[-1]), s.size)
    return WaveField(grid, time, data[:, 1] + 1j * data[:, 2])


def path_to_envelope(path: GbmPath) -> dict:
    # The time axis takes the place of the spatial grid.
    t = path.times
    return {
        "grid": {"s_min": _f(t[0]), "s_max": _f(t[-1]), "n": int(t.size)},
        "time": _f(t[-1]),
        "values": [[_f(p), 0.0] for p in path.prices],
    }


def write_gbm_path(path, gbm: GbmPath, fmt: str = "csv"):
    if fmt == "json":
        write_json(path, path_to_envelope(gbm))
    else:
        write_csv(path, ["t", "re", "im"], zip(gbm.times, gbm.prices, np.zeros_like(gbm.prices)))


# ------------------------------------------------------------------ frames

def frame_rows(frames: Sequence) -> tuple[list[str], list]:
    rows = []
    if frames and isinstance(frames[0], ManakovState):
        header = ["t", "s", "sigma_density", "psi_density"]
        for fr in frames:
            d1, d2 = fr.sigma_field.density(), fr.psi_field.density()
            rows += [(fr.time, s, a, b) for s, a, b in zip(fr.grid.nodes, d1, d2)]
    else:
        header = ["t", "s", "re", "im", "density"]
        for fr in frames:
            v = fr.values
            rows += [(fr.time, s, z.real, z.imag, abs(z) ** 2) for s, z in zip(fr.s, v)]
    return header, rows


def write_frames(path, frames: Sequence, fmt: str = "csv"):
    if fmt == "json":
        if frames and isinstance(frames[0], ManakovState):
            body = [{"sigma": field_to_envelope(f.sigma_field), "psi": field_to_envelope(f.psi_field)}
                    for f in frames]
        else:
            body = [field_to_envelope(f) for f in frames]
        write_json(path, {"frames": body})
    else:
        header, rows = frame_rows(frames)
        write_csv(path, header, rows)


def write_curves(path, s, columns: dict, fmt: str = "csv"):
    """Curve table with an ``s`` column followed by named value columns."""
    names = list(columns)
    if fmt == "json":
        write_json(path, {"s": [_f(x) for x in s], **{k: [_f(x) for x in columns[k]] for k in names}})
    else:
        write_csv(path, ["s", *names], zip(s, *(columns[k] for k in names)))
