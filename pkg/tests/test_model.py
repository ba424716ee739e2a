import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlcar.errors import InvalidParameterError, NonStationaryError
from wlcar.model import (
    EllipticalParams,
    WlParams,
    eccentricity,
    elliptical_to_wl,
    implied_relation,
    is_stationary,
    random_elliptical,
    spectral_radius,
    wl_to_elliptical,
)

from oracles import matrix_route_coefficients


def angle_mod(x, period):
    return (x + period / 2) % period - period / 2


def test_proper_collapse():
    wl, c_nu = elliptical_to_wl(EllipticalParams(0.8, 1.1, 1.0, 0.3, 0.7))
    assert wl.lam == pytest.approx(0.8, abs=1e-15)
    assert wl.alpha == pytest.approx(1.1, abs=1e-15)
    assert wl.gamma == 0
    assert wl.sigma2_nu == pytest.approx(1.4)
    assert c_nu == 0


@pytest.mark.parametrize("rho0", [0.3, 0.6, 0.95])
def test_quarter_turn_example(rho0):
    wl, _ = elliptical_to_wl(EllipticalParams(0.9, math.pi / 2, rho0, 0.0, 1.0))
    assert wl.alpha == pytest.approx(math.pi / 2, abs=1e-15)
    assert wl.lam == pytest.approx(0.45 * (1 / rho0**2 + rho0**2), rel=1e-14)
    assert wl.gamma == pytest.approx(0.45 * (1 / rho0**2 - rho0**2), rel=1e-14)
    assert wl.phi == pytest.approx(-math.pi / 2, abs=1e-15)


def test_matrix_route_matches_table(rng):
    for _ in range(100):
        ep = random_elliptical(rng)
        wl, c_nu = elliptical_to_wl(ep)
        A, B, noise = matrix_route_coefficients(ep.a, ep.theta, ep.rho, ep.psi, ep.sigma2_eps)
        ca, cb = wl.coefficients
        assert abs(A - ca) < 1e-12 and abs(B - cb) < 1e-12
        # noise variance and relation implied by the bivariate construction
        assert np.sum(np.abs(noise) ** 2) == pytest.approx(wl.sigma2_nu, rel=1e-12)
        assert abs(np.sum(noise**2) - c_nu) < 1e-12 * wl.sigma2_nu


def test_round_trip(rng):
    for _ in range(1000):
        ep = random_elliptical(rng)
        back = wl_to_elliptical(elliptical_to_wl(ep)[0])
        assert back.a == pytest.approx(ep.a, abs=1e-10)
        assert back.theta == pytest.approx(ep.theta, abs=1e-10)
        assert back.rho == pytest.approx(ep.rho, abs=1e-10)
        assert abs(angle_mod(back.psi - ep.psi, math.pi)) < 1e-10
        assert back.sigma2_eps == pytest.approx(ep.sigma2_eps, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(0.01, 0.99),
    theta=st.floats(-math.pi + 1e-3, math.pi).filter(lambda t: abs(t) > 1e-3),
    rho=st.floats(0.05, 1.0),
    psi=st.floats(0, math.pi, exclude_max=True),
)
def test_sign_alpha_equals_sign_theta(a, theta, rho, psi):
    wl, _ = elliptical_to_wl(EllipticalParams(a, theta, rho, psi, 1.0))
    assert math.copysign(1, wl.alpha) == math.copysign(1, theta)


def test_proper_wl_to_elliptical():
    ep = wl_to_elliptical(WlParams(0.9, math.pi / 3, 0.0, 1.234, 2.0))
    assert (ep.a, ep.theta, ep.rho, ep.sigma2_eps) == pytest.approx((0.9, math.pi / 3, 1.0, 1.0))


def test_isotropic_limit_defined():
    ep = wl_to_elliptical(WlParams(0.5, 0.0, 0.0, 0.3, 2.0))
    assert ep.rho == 1 and ep.psi == 0 and ep.sigma2_eps == 1.0


def test_boundary_rejected():
    p = WlParams(0.9, math.pi / 3, 0.9 * math.sin(math.pi / 3), 0.0, 1.0)
    with pytest.raises(InvalidParameterError, match="eccentricity"):
        wl_to_elliptical(p)
    with pytest.raises(InvalidParameterError):
        eccentricity(p)


def test_nonstationary_rejected():
    with pytest.raises(NonStationaryError, match="nonstationary"):
        wl_to_elliptical(WlParams(1.2, math.pi / 2, 0.1, 0.0, 1.0))


def test_lambda_zero_with_gamma_invalid():
    with pytest.raises(InvalidParameterError):
        wl_to_elliptical(WlParams(0.0, 1.0, 0.1, 0.0, 1.0))


def test_eccentricity_values(ref_process):
    assert eccentricity(WlParams(0.8, 1.0, 0.0, 0.0, 1.0)) == 0
    lam, alpha = 0.8, 1.0
    p = WlParams(lam, alpha, lam * abs(math.sin(alpha)) / 3, 0.0, 1.0)
    assert eccentricity(p) == pytest.approx(math.sqrt(0.5), abs=1e-14)
    rho = wl_to_elliptical(p).rho
    assert eccentricity(p) == pytest.approx(math.sqrt(1 - rho**4), abs=1e-12)
    p = ref_process[0]
    assert abs(eccentricity(p) - math.sqrt(1 - wl_to_elliptical(p).rho ** 4)) < 1e-12


def test_eccentricity_monotone_in_gamma():
    lam, alpha = 0.9, 2.0
    g = np.linspace(0, lam * abs(math.sin(alpha)), 200, endpoint=False)
    e = [eccentricity(WlParams(lam, alpha, gi, 0.0, 1.0)) for gi in g]
    assert np.all(np.diff(e) > 0)
    assert all(0 <= v < 1 for v in e)


@pytest.mark.parametrize(
    "lam,gamma,alpha,expected",
    [(0.99, 0.099, math.pi / 6, True), (1.2, 0.1, math.pi / 2, False), (1.05, 0.5, math.pi / 2, True)],
)
def test_is_stationary(lam, gamma, alpha, expected):
    assert is_stationary(WlParams(lam, alpha, gamma, 0.0, 1.0)) is expected


def test_spectral_radius_matches_damping(rng):
    for _ in range(50):
        wl, _ = elliptical_to_wl(random_elliptical(rng))
        assert spectral_radius(wl) == pytest.approx(wl.damping, rel=1e-9)


def test_implied_relation_values():
    assert implied_relation(WlParams(0.5, 1.0, 0.0, 2.0, 1.0)) == 0
    c = implied_relation(WlParams(0.297, math.pi / 6, 0.099, -math.pi / 4, 1.0))
    assert abs(c - (2 / 3) * np.exp(1j * math.pi / 4)) < 1e-12


def test_implied_relation_needs_spin():
    with pytest.raises(InvalidParameterError):
        implied_relation(WlParams(0.5, 0.0, 0.1, 0.0, 1.0))


def test_relation_two_ways(rng):
    for _ in range(200):
        ep = random_elliptical(rng)
        wl, c_nu = elliptical_to_wl(ep)
        direct = ep.sigma2_eps * (1 / ep.rho**2 - ep.rho**2) * np.exp(2j * ep.psi)
        assert abs(c_nu - direct) < 1e-12 * max(1, abs(direct))
        assert abs(implied_relation(wl) - direct) < 1e-12 * max(1, abs(direct))
        assert abs(c_nu) <= wl.sigma2_nu
