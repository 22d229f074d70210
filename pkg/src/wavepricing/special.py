"""Error function, normal CDF and Jacobi elliptic functions.

Jacobi functions take the *parameter* ``m`` (so ``sn(u, 0) = sin u`` and
``sn(u, 1) = tanh u``), not the modulus ``k = sqrt(m)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

# AGM iteration stops once |a_n - b_n| / 2 drops below this.
AGM_TOL = 1e-15
_AGM_MAX_ITER = 64


def erf(x):
    return _sp.erf(x)


def std_normal_cdf(x):
    # erfc keeps full relative precision in the far left tail.
    return 0.5 * _sp.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def _check_parameter(m):
    m = np.asarray(m, dtype=float)
    if np.any((m < 0) | (m > 1)) or not np.all(np.isfinite(m)):
        raise ValueError("elliptic parameter m must lie in [0, 1]")
    return m


def agm(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(_AGM_MAX_ITER):
        if np.all(0.5 * np.abs(a - b) < AGM_TOL * np.maximum(1.0, np.abs(a))):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return a


def ellipk(m):
    """Quarter period K(m); infinite at m = 1."""
    m = _check_parameter(m)
    with np.errstate(divide="ignore"):
        out = np.where(m < 1.0, math.pi / (2.0 * agm(1.0, np.sqrt(1.0 - np.minimum(m, 1.0)))), np.inf)
    return out[()] if out.ndim == 0 else out


def _agm_sncndn(u, m):
    # Descending Landen transformation (A&S 16.4).
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    c = np.sqrt(m)
    a_hist, c_hist = [a], [c]
    for _ in range(_AGM_MAX_ITER):
        if np.all(np.abs(c) < AGM_TOL):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        a_hist.append(a)
        c_hist.append(c)
    n = len(a_hist) - 1
    phi = (2.0**n) * a_hist[n] * u
    phi_prev = phi
    for j in range(n, 0, -1):
        phi_prev = phi
        ratio = np.clip(c_hist[j] / a_hist[j] * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(ratio))
    sn = np.sin(phi)
    cn = np.cos(phi)
    if n == 0:
        dn = np.ones_like(phi)
    else:
        dn = cn / np.cos(phi_prev - phi)
    return sn, cn, dn


def jacobi_sncndn(u, m):
    """sn, cn, dn at argument ``u`` and parameter ``m`` (broadcast together)."""
    u = np.asarray(u, dtype=float)
    m = _check_parameter(m)
    u, m = np.broadcast_arrays(u, m)
    sn = np.empty(u.shape)
    cn = np.empty(u.shape)
    dn = np.empty(u.shape)

    # The AGM degenerates at m = 1 (b0 = 0); use the closed hyperbolic forms.
    hyper = m == 1.0
    if np.any(hyper):
        sech = 1.0 / np.cosh(u[hyper])
        sn[hyper], cn[hyper], dn[hyper] = np.tanh(u[hyper]), sech, sech
    rest = ~hyper
    if np.any(rest):
        sn[rest], cn[rest], dn[rest] = _agm_sncndn(u[rest], m[rest])
    if sn.ndim == 0:
        return sn[()], cn[()], dn[()]
    return sn, cn, dn


def jacobi_sn(u, m):
    return jacobi_sncndn(u, m)[0]


def jacobi_cn(u, m):
    return jacobi_sncndn(u, m)[1]


def jacobi_dn(u, m):
    return jacobi_sncndn(u, m)[2]
