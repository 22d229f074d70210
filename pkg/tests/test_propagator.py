import math

import numpy as np
import pytest

from wavepricing.black_scholes import OptionKind, price_surface
from wavepricing.manakov import SolitonSpec, soliton_state
from wavepricing.market import OptionParams, WaveField, make_grid, periodic_grid
from wavepricing.nls import NlsParams, psi_soliton
from wavepricing.propagator import (BlackScholesPDE, EvolutionSpec, FreeSchrodinger, Manakov, Nls,
                                    NumericalDivergence, StepSizeError, conserved_quantities, max_drift,
                                    observed_orders, pde_residual, split_step_evolve)
from wavepricing.quantum import (BoundaryDecayError, GaussianPacketSpec, angular_wavenumbers, fourier_propagate,
                                 gaussian_packet)

SOL = NlsParams(sigma=0.5, const_beta=0.5, wave_number=1.0)
GRID = periodic_grid(80.0, 1024)


def soliton_field(t=0.0):
    return WaveField(GRID, t, psi_soliton(GRID.nodes, t, SOL))


def evolve(field, eq, dt, t_final, **kw):
    return split_step_evolve(field, EvolutionSpec(eq, dt, t_final, **kw))


def test_spec_validation():
    with pytest.raises(ValueError):
        EvolutionSpec(Nls(0.5, 0.5), 0.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionSpec(Nls(0.5, 0.5), 0.1, -1.0)
    with pytest.raises(ValueError):
        EvolutionSpec(Nls(0.5, 0.5), 0.1, 1.0, record_every=0)
    with pytest.raises(ValueError):
        EvolutionSpec(Nls(0.5, 0.5), 0.3, 1.0).n_steps


def test_preconditions():
    with pytest.raises(StepSizeError):
        evolve(soliton_field(), Nls(0.5, 0.5), 0.05, 1.0)
    bad_grid = make_grid(-40, 40, 1000)
    with pytest.raises(ValueError):
        evolve(WaveField(bad_grid, 0.0, psi_soliton(bad_grid.nodes, 0.0, SOL)), Nls(0.5, 0.5), 1e-3, 1e-3)
    wide = WaveField(GRID, 0.0, np.ones(GRID.n_points))
    with pytest.raises(BoundaryDecayError):
        evolve(wide, Nls(0.5, 0.5), 1e-3, 1e-3)
    with pytest.raises(TypeError):
        evolve(soliton_field(), Manakov(), 1e-3, 1e-3)


def test_divergence_detected():
    g = periodic_grid(20.0, 64)
    f = WaveField(g, 0.0, 1e200 * np.exp(-g.nodes**2))
    with pytest.raises(NumericalDivergence):
        evolve(f, Nls(0.5, 1.0), 1e-3, 1e-2)


def test_plane_wave_mode_exact():
    g = periodic_grid(2 * math.pi, 64)
    kap = angular_wavenumbers(64, g.ds)[3]
    f = WaveField(g, 0.0, np.exp(1j * kap * g.nodes))
    out = evolve(f, Nls(0.4, 0.0), 1e-3, 1.0, check_decay=False)[-1]
    np.testing.assert_allclose(out.values, f.values * np.exp(-0.2j * kap**2), atol=1e-12)


def test_soliton_fidelity_and_order():
    errs = []
    for dt in (1e-3, 5e-4, 2.5e-4):
        frames = evolve(soliton_field(), Nls(0.5, 0.5), dt, 0.5, record_every=10**6)
        errs.append(np.max(np.abs(frames[-1].values - psi_soliton(GRID.nodes, 0.5, SOL))))
        assert len(frames) == 2
    assert errs[0] <= 1e-6
    orders = observed_orders([1e-3, 5e-4, 2.5e-4], errs)
    assert np.all((orders > 1.8) & (orders < 2.2)), orders


def test_record_every_and_zero_duration():
    frames = evolve(soliton_field(), Nls(0.5, 0.5), 1e-3, 0.01, record_every=3)
    assert [round(f.time, 6) for f in frames] == [0.0, 0.003, 0.006, 0.009, 0.01]
    single = evolve(soliton_field(), Nls(0.5, 0.5), 1e-3, 0.0)
    assert len(single) == 1
    np.testing.assert_array_equal(single[0].values, soliton_field().values)


def test_time_reversibility():
    f0 = soliton_field()
    fwd = evolve(f0, Nls(0.5, 0.5), 1e-3, 0.5)[-1]
    back = evolve(fwd, Nls(0.5, 0.5), 1e-3, 0.5, backward=True)[-1]
    assert back.time == pytest.approx(0.0, abs=1e-12)
    assert np.max(np.abs(back.values - f0.values)) <= 1e-9


def test_linear_limit_matches_fourier():
    g = periodic_grid(40.0, 512)
    spec = GaussianPacketSpec(1.0, 1.0, 0.5)
    f0 = WaveField(g, 0.0, gaussian_packet(g.nodes, 0.0, spec, 0.6))
    for eq in (Nls(0.6, 0.0), FreeSchrodinger(0.6)):
        out = evolve(f0, eq, 1e-3, 0.4)[-1]
        ref = fourier_propagate(f0, out.time, 0.6)
        assert np.max(np.abs(out.values - ref.values)) <= 1e-12


def test_pointwise_beta_profile():
    g = periodic_grid(40.0, 256)
    f0 = WaveField(g, 0.0, np.exp(-g.nodes**2))
    prof = 0.3 + 0.1 * np.tanh(g.nodes)
    frames = evolve(f0, Nls(0.5, prof), 1e-3, 0.2)
    assert max_drift(conserved_quantities(frames, Nls(0.5, prof)), "norm") < 1e-12
    with pytest.raises(ValueError):
        evolve(f0, Nls(0.5, np.ones(10)), 1e-3, 0.2)


def test_conserved_quantities_gaussian():
    g = periodic_grid(40.0, 256)
    f0 = WaveField(g, 0.0, gaussian_packet(g.nodes, 0.0, GaussianPacketSpec(1.0, 0.0, 1.0), 0.8))
    eq = FreeSchrodinger(0.8)
    frames = evolve(f0, eq, 1e-3, 1.0, record_every=100)
    reps = conserved_quantities(frames, eq)
    assert reps[0].norm_drift == 0.0
    assert max_drift(reps, "norm") <= 1e-12
    assert max_drift(reps, "energy") <= 1e-10
    assert reps[0].norm == pytest.approx(1.0, abs=1e-12)
    # <p> = sigma * k0 with k0 = p0 / sigma; momentum here is Im int conj(q) q_s = k0.
    assert reps[0].momentum == pytest.approx(1.0 / 0.8, rel=1e-10)


def test_manakov_fidelity():
    g = periodic_grid(120.0, 1024)
    spec = SolitonSpec(0.25, 0.5, (math.sqrt(0.5), math.sqrt(0.5)))
    s0 = soliton_state(g, 0.0, spec)
    frames = evolve(s0, Manakov(), 1e-3, 1.0, record_every=100)
    ref = soliton_state(g, 1.0, spec)
    assert np.max(np.abs(frames[-1].as_array() - ref.as_array())) <= 1e-5
    assert max_drift(conserved_quantities(frames, Manakov()), "norm") <= 1e-8


def test_residual_zero_surface_and_errors():
    t = np.linspace(0, 1, 5)
    s = np.linspace(0, 1, 6)
    r = pde_residual(np.zeros((5, 6)), t, s, Nls(0.5, 1.0))
    assert r.linf == 0 and r.l2 == 0
    with pytest.raises(ValueError):
        pde_residual(np.zeros((2, 6)), t[:2], s, Nls(0.5, 1.0))
    with pytest.raises(ValueError):
        pde_residual(np.zeros((5, 6)), np.array([0, 0.1, 0.5, 0.6, 1.0]), s, Nls(0.5, 1.0))
    with pytest.raises(ValueError):
        pde_residual(np.zeros((5, 6)), t, s, Manakov())
    with pytest.raises(TypeError):
        pde_residual(np.zeros((5, 6)), t, s, "heat")


def test_black_scholes_residual_order():
    p = OptionParams()
    errs = []
    for n in (21, 41, 81):
        t = np.linspace(0, 0.5, n)
        s = np.linspace(80, 120, n)
        surf = price_surface(s, t, p, OptionKind.CALL)
        errs.append(pde_residual(surf, t, s, BlackScholesPDE(0.2, 0.05)).linf)
    orders = observed_orders([1 / 20, 1 / 40, 1 / 80], errs)
    assert np.all((orders > 1.8) & (orders < 2.2)), orders
