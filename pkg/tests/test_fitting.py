import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import least_squares

from wavepricing.black_scholes import OptionKind
from wavepricing.fitting import (FitError, LMOptions, NlsPdfLayout, Objective, fit_nls_to_bs, fit_packet_to_bs,
                                 flat_packet_start, jacobian_mismatch, kink_location, levenberg_marquardt, nls_pdf,
                                 packet_objective, packet_theta)
from wavepricing.market import make_rng
from wavepricing.nls import WeightSet
from wavepricing.quantum import PlaneWaveBasis, packet_pdf
from wavepricing.reproduction import CALL_N3, PUT_N7, default_target, nls_start, published_theta

S = np.linspace(75.0, 140.0, 128)

# Regression baselines, computed once with the default targets and documented starts.
NLS_CALL_BASELINE = 0.7531902991809952
PACKET_PUT_RESTART_BASELINE = 0.019212437262022583
PACKET_CALL_RESTART_BASELINE = 0.027306203511652104


def linear_objective(theta_true, s):
    y = theta_true[0] * s + theta_true[1]
    return Objective(lambda th: th[0] * s + th[1] - y, 2, lambda th: np.column_stack([s, np.ones_like(s)]))


def test_zero_residual_start():
    obj = linear_objective([2.0, -1.0], S)
    res = levenberg_marquardt(obj, [2.0, -1.0])
    assert res.converged and res.iterations == 0 and res.rmse == 0.0 and res.status == "zero_residual"


def test_linear_model_two_iterations():
    s = np.linspace(-1, 1, 50)
    obj = linear_objective([2.5, -0.75], s)
    res = levenberg_marquardt(obj, [0.0, 0.0], LMOptions(lambda0=1e-8, max_iter=2))
    np.testing.assert_allclose(res.theta, [2.5, -0.75], atol=1e-10)
    assert res.iterations <= 2


def test_validation_and_errors():
    obj = linear_objective([1.0, 1.0], S)
    with pytest.raises(ValueError):
        levenberg_marquardt(obj, [1.0])
    with pytest.raises(ValueError):
        levenberg_marquardt(obj, [math.nan, 1.0])
    bad = Objective(lambda th: np.full(4, np.inf), 2)
    with pytest.raises(FitError):
        levenberg_marquardt(bad, [0.0, 0.0])
    short = Objective(lambda th: np.zeros(1) + th[0], 2)
    with pytest.raises(ValueError):
        levenberg_marquardt(short, [1.0, 1.0])


def test_nonfinite_trials_are_rejected():
    # sqrt domain: steps that leave theta > 0 produce NaN and must be rejected.
    x = np.linspace(0.1, 2, 20)
    y = np.sqrt(0.5) * x

    def r(th):
        with np.errstate(invalid="ignore"):
            return np.sqrt(th[0]) * x - y

    res = levenberg_marquardt(Objective(r, 1), [3.0], LMOptions(max_iter=200))
    assert res.theta[0] == pytest.approx(0.5, rel=1e-8)
    assert all(b <= a for a, b in zip(res.residual_history, res.residual_history[1:]))


def test_max_iter_zero_returns_start():
    g, target = default_target(OptionKind.PUT)
    res = fit_packet_to_bs(g.nodes, target, 7, published_theta(PUT_N7), LMOptions(max_iter=0))
    np.testing.assert_array_equal(res.theta, published_theta(PUT_N7))
    assert res.iterations == 0 and len(res.residual_history) == 1


def test_nls_shock_self_fit_recovery():
    lay = NlsPdfLayout(1, "shock")
    truth = lay.pack(0.2, 1.0, 500.0, WeightSet(((10.0, 0.01, 1.0),)))
    y = nls_pdf(S, truth, lay, 0.05)
    start = truth.copy()
    start[lay.free_index()] *= np.array([1.02, 0.95, 1.05])
    fit = fit_nls_to_bs(S, y, lay, start, 0.05, LMOptions(max_iter=200))
    np.testing.assert_allclose(fit.full, truth, rtol=1e-4)


def test_packet_self_fit_recovery():
    s = np.linspace(-6, 6, 121)
    b = PlaneWaveBasis.from_arrays(0.6, [0.5, 0.9, 1.4], [1.0, 0.7, 0.4])
    truth = packet_theta(b, 0.6)
    y = packet_pdf(s, 0.6, b)
    start = truth * (1 + 0.03 * np.array([1, 1, -1, 2, 1, -1, 1, 2]))
    res = fit_packet_to_bs(s, y, 3, start, LMOptions(max_iter=300))
    np.testing.assert_allclose(res.theta, truth, rtol=1e-4)


def test_packet_jacobian_at_random_points():
    g, target = default_target(OptionKind.PUT)
    obj = packet_objective(g.nodes, target, 7)
    rng = make_rng(11)
    base = published_theta(PUT_N7)
    for _ in range(10):
        theta = base * (1 + 0.05 * rng.standard_normal(base.size))
        assert jacobian_mismatch(obj, theta) <= 1e-6
    phys = packet_objective(np.linspace(-5, 5, 64), np.ones(64), 3)
    for _ in range(10):
        theta = np.concatenate([rng.uniform(0.1, 1, 2), rng.uniform(-2, 2, 3), rng.uniform(-1, 1, 3)])
        assert jacobian_mismatch(phys, theta) <= 1e-6


@given(st.permutations(range(3)))
def test_packet_permutation_symmetry(perm):
    obj = packet_objective(S, np.linspace(1, 2, S.size), 3)
    theta = published_theta(CALL_N3)
    k, c = theta[2:5], theta[5:8]
    permuted = np.concatenate([theta[:2], k[list(perm)], c[list(perm)]])
    r1, r2 = obj.residual(theta), obj.residual(permuted)
    assert float(r1 @ r1) == pytest.approx(float(r2 @ r2), rel=1e-12)


def test_flat_packet_fit_is_target_mean():
    _, target = default_target(OptionKind.CALL)
    res = fit_packet_to_bs(S, target, 1, flat_packet_start(target), LMOptions(max_iter=50))
    assert res.rmse == pytest.approx(float(np.std(target)), rel=1e-8)
    assert res.theta[3] ** 2 == pytest.approx(float(np.mean(target)), rel=1e-8)


def test_determinism():
    _, target = default_target(OptionKind.PUT)
    a = fit_packet_to_bs(S, target, 7, published_theta(PUT_N7), LMOptions(max_iter=20))
    b = fit_packet_to_bs(S, target, 7, published_theta(PUT_N7), LMOptions(max_iter=20))
    np.testing.assert_array_equal(a.theta, b.theta)
    assert a.residual_history == b.residual_history and a.lambda_history == b.lambda_history


def test_accepted_steps_never_increase_cost():
    _, target = default_target(OptionKind.PUT)
    lay = NlsPdfLayout(2, "shock")
    fit = fit_nls_to_bs(S, target, lay, nls_start(OptionKind.PUT, lay), 0.05)
    h = fit.result.residual_history
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert len(fit.result.lambda_history) == len(h)


def test_blend_with_fixed_d_tracks_shock():
    _, target = default_target(OptionKind.PUT)
    shock = NlsPdfLayout(2, "shock")
    blend = NlsPdfLayout(2, "blend", free=shock.free)
    start = nls_start(OptionKind.PUT, shock)
    a = fit_nls_to_bs(S, target, shock, start, 0.05, LMOptions(max_iter=30))
    b = fit_nls_to_bs(S, target, blend, start, 0.05, LMOptions(max_iter=30))
    np.testing.assert_array_equal(a.result.theta, b.result.theta)
    assert a.result.residual_history == b.result.residual_history


def test_call_fit_below_baseline():
    _, target = default_target(OptionKind.CALL)
    lay = NlsPdfLayout(2, "shock")
    fit = fit_nls_to_bs(S, target, lay, nls_start(OptionKind.CALL, lay), 0.05)
    assert fit.result.rmse <= NLS_CALL_BASELINE + 1e-9


def test_packet_restarts_below_baselines():
    for kind, table, base in ((OptionKind.PUT, PUT_N7, PACKET_PUT_RESTART_BASELINE),
                              (OptionKind.CALL, CALL_N3, PACKET_CALL_RESTART_BASELINE)):
        _, target = default_target(kind)
        res = fit_packet_to_bs(S, target, len(table["k"]), published_theta(table))
        assert res.rmse <= base + 1e-9
        assert res.cost <= res.residual_history[0]


def test_normalized_objective():
    _, target = default_target(OptionKind.PUT)
    obj = packet_objective(S, target, 7, normalize=True)
    assert obj.jacobian is None
    r = obj.residual(published_theta(PUT_N7))
    assert np.max(np.abs(r)) <= 2.0


def test_matches_scipy_least_squares():
    x = np.linspace(0, 3, 40)
    y = 2.0 * np.exp(-1.3 * x) + 0.1 * np.sin(3 * x)

    def r(th):
        return th[0] * np.exp(-th[1] * x) - y

    ours = levenberg_marquardt(Objective(r, 2), [1.0, 0.5], LMOptions(max_iter=200))
    ref = least_squares(r, [1.0, 0.5], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    np.testing.assert_allclose(ours.theta, ref.x, rtol=1e-7)
    assert ours.cost == pytest.approx(ref.cost, rel=1e-10)


def test_kink_location():
    s = np.linspace(0, 10, 101)
    target = np.sqrt((s - 4.0) ** 2 + 0.25)
    model = np.abs(s - 4.0)
    assert abs(kink_location(s, model, target) - 4.0) <= 0.1 + 1e-12


def test_singular_start_raises():
    lay = NlsPdfLayout(1, "shock")
    zero_beta = lay.pack(0.2, 1.0, 500.0, WeightSet(((0.0, 0.01, 1.0),)))
    with pytest.raises(FitError):
        fit_nls_to_bs(S, np.ones_like(S), lay, zero_beta, 0.05)
    with pytest.raises(ValueError):
        fit_packet_to_bs(S, np.ones_like(S), 2, np.ones(5))
