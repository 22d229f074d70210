import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy import special as sp

from wavepricing.special import (agm, ellipk, erf, jacobi_cn, jacobi_dn, jacobi_sn, jacobi_sncndn,
                                 std_normal_cdf)


def test_erf_against_mpmath_lattice():
    x = np.linspace(-6.0, 6.0, 10_000)
    oracle = np.array([float(mp.erf(v)) for v in x])
    assert np.max(np.abs(erf(x) - oracle)) <= 1e-15


def test_erf_against_quadrature_sample():
    for x in np.linspace(-4.0, 4.0, 41):
        q, _ = integrate.quad(lambda t: 2.0 / math.sqrt(math.pi) * math.exp(-t * t), 0.0, x,
                              epsabs=1e-14, epsrel=1e-13)
        assert abs(erf(x) - q) <= 1e-10


def test_normal_cdf_tails_and_symmetry():
    x = np.linspace(-30.0, 8.0, 2001)
    oracle = np.array([float(mp.ncdf(v)) for v in x])
    assert np.max(np.abs(std_normal_cdf(x) - oracle) / oracle) < 1e-12
    np.testing.assert_allclose(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, atol=1e-15)
    assert std_normal_cdf(0.0) == 0.5


def test_agm_and_ellipk():
    assert float(agm(1.0, math.sqrt(2.0))) == pytest.approx(float(mp.agm(1, mp.sqrt(2))), rel=1e-15)
    m = np.linspace(0.0, 0.999999, 500)
    np.testing.assert_allclose(ellipk(m), sp.ellipk(m), rtol=1e-13)
    assert ellipk(1.0) == math.inf


def test_sn_cn_by_elliptic_integral_inversion():
    # sn(F(phi|m)|m) = sin(phi), cn = cos(phi): F from an independent implementation.
    phi, m = np.meshgrid(np.linspace(-10.0, 10.0, 100), np.linspace(0.0, 0.99, 100))
    u = sp.ellipkinc(phi, m)
    sn, cn, dn = jacobi_sncndn(u, m)
    assert np.max(np.abs(sn - np.sin(phi))) <= 1e-10
    assert np.max(np.abs(cn - np.cos(phi))) <= 1e-10
    assert np.max(np.abs(dn - np.sqrt(1.0 - m * np.sin(phi) ** 2))) <= 1e-10


def test_sn_cn_near_unit_parameter():
    phi, m = np.meshgrid(np.linspace(-1.5, 1.5, 50), 1.0 - np.logspace(-14, -3, 20))
    u = sp.ellipkinc(phi, m)
    sn, cn, _ = jacobi_sncndn(u, m)
    assert np.max(np.abs(sn - np.sin(phi))) <= 1e-10
    assert np.max(np.abs(cn - np.cos(phi))) <= 1e-10


def test_sn_against_mpmath_ellipfun():
    for m in (0.1, 0.5, 0.9, 0.999):
        for u in np.linspace(-7.0, 7.0, 29):
            assert abs(jacobi_sn(u, m) - float(mp.ellipfun("sn", u, m=m))) < 1e-12
            assert abs(jacobi_cn(u, m) - float(mp.ellipfun("cn", u, m=m))) < 1e-12
            assert abs(jacobi_dn(u, m) - float(mp.ellipfun("dn", u, m=m))) < 1e-12


def test_limits():
    u = np.linspace(-5.0, 5.0, 101)
    np.testing.assert_allclose(jacobi_sn(u, 0.0), np.sin(u), atol=1e-15)
    np.testing.assert_allclose(jacobi_cn(u, 0.0), np.cos(u), atol=1e-15)
    np.testing.assert_allclose(jacobi_sn(u, 1.0), np.tanh(u), atol=1e-15)
    np.testing.assert_allclose(jacobi_cn(u, 1.0), 1.0 / np.cosh(u), atol=1e-15)


def test_quarter_period():
    for m in (0.2, 0.7):
        assert jacobi_sn(ellipk(m), m) == pytest.approx(1.0, abs=1e-12)
        assert jacobi_cn(ellipk(m), m) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("m", [-0.1, 1.1, math.nan])
def test_parameter_out_of_range(m):
    with pytest.raises(ValueError):
        jacobi_sn(0.3, m)


@given(st.floats(-50.0, 50.0), st.floats(0.0, 1.0))
def test_pythagorean_identities(u, m):
    sn, cn, dn = jacobi_sncndn(u, m)
    assert abs(sn * sn + cn * cn - 1.0) <= 1e-10
    assert abs(dn * dn + m * sn * sn - 1.0) <= 1e-10
    assert abs(sn) <= 1.0 + 1e-15


@given(st.floats(-20.0, 20.0), st.floats(0.0, 0.99))
def test_sn_is_odd_and_cn_even(u, m):
    assert jacobi_sn(-u, m) == pytest.approx(-jacobi_sn(u, m), abs=1e-13)
    assert jacobi_cn(-u, m) == pytest.approx(jacobi_cn(u, m), abs=1e-13)


@given(st.floats(-10.0, 10.0))
def test_erf_odd(x):
    assert erf(-x) == -erf(x)
