import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from wavepricing.io import (config_hash, field_from_envelope, field_to_envelope, read_csv, read_field_csv,
                            write_field, write_frames, write_gbm_path)
from wavepricing.manakov import SolitonSpec, soliton_state
from wavepricing.market import WaveField, make_grid, periodic_grid, simulate_gbm


def schema(name):
    return json.loads(resources.files("wavepricing").joinpath("schemas", f"{name}.schema.json").read_text())


def sample_field():
    g = make_grid(-2.0, 2.0, 16)
    return WaveField(g, 0.25, np.exp(1j * g.nodes) * np.exp(-g.nodes**2) / 3.0)


def test_field_csv_roundtrip(tmp_path):
    f = sample_field()
    write_field(tmp_path / "f.csv", f)
    back = read_field_csv(tmp_path / "f.csv", time=0.25)
    assert back.grid == f.grid
    np.testing.assert_array_equal(back.values, f.values)


def test_field_json_roundtrip(tmp_path):
    f = sample_field()
    write_field(tmp_path / "f.json", f, "json")
    env = json.loads((tmp_path / "f.json").read_text())
    jsonschema.validate(env, schema("field"))
    assert env["grid"] == {"s_min": -2.0, "s_max": 2.0, "n": 16} and env["time"] == 0.25
    back = field_from_envelope(env)
    np.testing.assert_array_equal(back.values, f.values)
    assert field_to_envelope(back) == env


def test_gbm_path_formats(tmp_path):
    p = simulate_gbm(100.0, 0.05, 0.2, 1.0, 10, seed=1)
    write_gbm_path(tmp_path / "p.csv", p)
    header, data = read_csv(tmp_path / "p.csv")
    assert header == ["t", "re", "im"]
    np.testing.assert_array_equal(data[:, 1], p.prices)
    write_gbm_path(tmp_path / "p.json", p, "json")
    env = json.loads((tmp_path / "p.json").read_text())
    jsonschema.validate(env, schema("field"))
    assert env["grid"]["n"] == 11


def test_manakov_frames_csv(tmp_path):
    g = periodic_grid(20.0, 32)
    st = soliton_state(g, 0.0, SolitonSpec(0.1, 0.5, (0.6, 0.8)))
    write_frames(tmp_path / "fr.csv", [st, st])
    header, data = read_csv(tmp_path / "fr.csv")
    assert header == ["t", "s", "sigma_density", "psi_density"]
    assert data.shape == (64, 4)
    np.testing.assert_allclose(data[:32, 2], st.sigma_field.density())


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert len(config_hash({})) == 64


def test_bad_field_header(tmp_path):
    (tmp_path / "x.csv").write_text("x,re,im\n0,1,2\n")
    with pytest.raises(ValueError):
        read_field_csv(tmp_path / "x.csv")
