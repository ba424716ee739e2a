"""Stationary simulation of the widely linear complex AR(1) process and of the
order-one linear recursion driven by doubly white noise.

Random number consumption is fixed: for each signal of length ``n`` an
``(n, 2)`` block of standard normals is drawn; row 0 initialises ``Z_0`` and
row ``t`` builds the innovation ``nu_t``.  Both simulators share this
layout, so equal seeds give directly comparable signals.
"""

from __future__ import annotations

import cmath

import numpy as np

from .complex_normal import transform_normals
from .errors import InvalidParameterError, NonStationaryError
from .model import WlParams, check_stable
from .moments import zero_lag_moments


def _recurse(A: complex, B: complex, z0, noise: np.ndarray) -> np.ndarray:
    """Run ``Z_t = A Z_{t-1} + B Z*_{t-1} + noise_t`` along the last axis."""
    out = np.empty(noise.shape, dtype=complex)
    out[..., 0] = z0
    prev = out[..., 0]
    for t in range(1, noise.shape[-1]):
        prev = A * prev + B * np.conj(prev) + noise[..., t]
        out[..., t] = prev
    return out


def _draw(rng, n: int, size) -> np.ndarray:
    shape = () if size is None else tuple(np.atleast_1d(size))
    return np.random.default_rng(rng).standard_normal((*shape, n, 2))


def simulate_wlcar1(p: WlParams, c_nu: complex, n: int, rng=None, size=None, z0=None) -> np.ndarray:
    """Simulate the widely linear complex AR(1) process.

    Parameters
    ----------
    p : WlParams
        Process parameters; must be stationary unless ``z0`` is given.
    c_nu : complex
        Noise relation at lag zero (see :func:`wlcar.model.implied_relation`).
    n : int
        Signal length.
    rng : int, numpy.random.Generator or None
        Seed or generator.
    size : int or tuple, optional
        Number of independent signals; output shape is ``(*size, n)``.
    z0 : complex, optional
        Fixed initial value.  By default ``Z_0`` is drawn from the stationary
        marginal ``N_C(0, sigma2_Z, c_Z)`` so no burn-in is needed.

    Returns
    -------
    numpy.ndarray
        Complex samples.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if abs(c_nu) > p.sigma2_nu * (1 + 1e-12):
        raise InvalidParameterError("|c_nu| exceeds sigma2_nu")
    u = _draw(rng, n, size)
    noise = transform_normals(u, p.sigma2_nu, c_nu)
    if z0 is None:
        check_stable(p)
        s0, r0 = zero_lag_moments(p, c_nu)
        init = transform_normals(u[..., 0, :], s0, r0)
    else:
        init = np.full(noise.shape[:-1], complex(z0))
    A, B = p.coefficients
    return _recurse(A, B, init, noise)


def simulate_improper_car1(g: complex, sigma2_nu: float, c_nu: complex, n: int, rng=None,
                           size=None) -> np.ndarray:
    """Simulate ``Z_t = g Z_{t-1} + nu_t`` with doubly white noise ``nu_t``.

    Impropriety here comes only from the noise relation ``c_nu``.
    """
    if abs(g) >= 1:
        raise NonStationaryError("nonstationary: |g| must be below 1")
    if sigma2_nu <= 0 or abs(c_nu) > sigma2_nu * (1 + 1e-12):
        raise InvalidParameterError("need sigma2_nu > 0 and |c_nu| <= sigma2_nu")
    g = complex(g)
    u = _draw(rng, n, size)
    noise = transform_normals(u, sigma2_nu, c_nu)
    s0 = sigma2_nu / (1 - abs(g) ** 2)
    r0 = c_nu / (1 - g * g)
    init = transform_normals(u[..., 0, :], s0, r0)
    return _recurse(g, 0j, init, noise)


def proper_car1(a: float, theta: float, sigma2_eps: float, n: int, rng=None, size=None) -> np.ndarray:
    """Proper complex AR(1) ``a e^{i theta} Z_{t-1} + eps_t`` (per-component variance sigma2_eps)."""
    return simulate_improper_car1(a * cmath.exp(1j * theta), 2 * sigma2_eps, 0j, n, rng, size)


def piecewise_wlcar1(segments, rng=None) -> np.ndarray:
    """Concatenate regimes ``[(WlParams, c_nu, length), ...]``.

    The first regime starts from its stationary law; later regimes continue
    from the last value of the previous one.
    """
    rng = np.random.default_rng(rng)
    pieces = []
    last = None
    for p, c_nu, length in segments:
        if last is None:
            z = simulate_wlcar1(p, c_nu, length, rng)
        else:
            z = simulate_wlcar1(p, c_nu, length + 1, rng, z0=last)[1:]
        pieces.append(z)
        last = z[-1]
    return np.concatenate(pieces)
