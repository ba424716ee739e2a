"""Parameter sets of the widely linear complex AR(1) process and their mappings.

The process is

    Z_t = lam e^{i alpha} Z_{t-1} + gamma e^{i phi} Z*_{t-1} + nu_t

with doubly white Gaussian noise ``nu_t`` of variance ``sigma2_nu`` and
relation ``c_nu``.  In the five-parameter model ``c_nu`` is tied to the
other parameters so that the process coincides with an elliptically
transformed isotropic bivariate AR(1) with parameters
``(a, theta, rho, psi, sigma2_eps)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParameterError, NonStationaryError

WL_KEYS = ("lambda", "alpha", "gamma", "phi", "sigma2_nu")
ELLIPTICAL_KEYS = ("a", "theta", "rho", "psi", "sigma2_eps")


def _sign(x: float) -> float:
    # sign(0) = +1, continuous with the x -> 0+ limit
    return -1.0 if x < 0 else 1.0


def wrap_angle(x: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def wrap_orientation(x: float) -> float:
    """Wrap an orientation (defined modulo pi) into [0, pi)."""
    y = math.fmod(x, math.pi)
    if y < 0:
        y += math.pi
    return 0.0 if y >= math.pi else y


@dataclass(frozen=True)
class WlParams:
    """Widely linear parameters ``(lambda, alpha, gamma, phi, sigma2_nu)``."""

    lam: float
    alpha: float
    gamma: float
    phi: float
    sigma2_nu: float

    def __post_init__(self):
        if not all(map(math.isfinite, self.as_tuple())):
            raise InvalidParameterError(f"non-finite parameter in {self}")
        if self.lam < 0 or self.gamma < 0:
            raise InvalidParameterError("lambda and gamma must be nonnegative")
        if self.sigma2_nu <= 0:
            raise InvalidParameterError("sigma2_nu must be positive")

    def as_tuple(self):
        return (self.lam, self.alpha, self.gamma, self.phi, self.sigma2_nu)

    def as_dict(self) -> dict:
        return dict(zip(WL_KEYS, self.as_tuple()))

    @classmethod
    def from_dict(cls, d) -> "WlParams":
        return cls(*(float(d[k]) for k in WL_KEYS))

    @property
    def coefficients(self) -> tuple[complex, complex]:
        """Complex coefficients on ``Z_{t-1}`` and ``Z*_{t-1}``."""
        return (
            self.lam * complex(math.cos(self.alpha), math.sin(self.alpha)),
            self.gamma * complex(math.cos(self.phi), math.sin(self.phi)),
        )

    @property
    def damping(self) -> float:
        """Modulus of the eigenvalues of the bivariate transition matrix."""
        return math.sqrt(max(self.lam**2 - self.gamma**2, 0.0))

    def canonical(self) -> "WlParams":
        return WlParams(
            self.lam, wrap_angle(self.alpha), self.gamma, wrap_angle(self.phi), self.sigma2_nu
        )


@dataclass(frozen=True)
class EllipticalParams:
    """Elliptical bivariate AR(1) parameters ``(a, theta, rho, psi, sigma2_eps)``."""

    a: float
    theta: float
    rho: float
    psi: float
    sigma2_eps: float

    def __post_init__(self):
        if not all(map(math.isfinite, asdict(self).values())):
            raise InvalidParameterError(f"non-finite parameter in {self}")
        if not 0 <= self.a < 1:
            raise NonStationaryError(f"a must lie in [0, 1), got {self.a}")
        if not 0 < self.rho <= 1:
            raise InvalidParameterError(f"rho must lie in (0, 1], got {self.rho}")
        if self.sigma2_eps <= 0:
            raise InvalidParameterError("sigma2_eps must be positive")

    def as_dict(self) -> dict:
        return dict(zip(ELLIPTICAL_KEYS, (self.a, self.theta, self.rho, self.psi, self.sigma2_eps)))

    @classmethod
    def from_dict(cls, d) -> "EllipticalParams":
        return cls(*(float(d[k]) for k in ELLIPTICAL_KEYS))

    @property
    def eccentricity(self) -> float:
        return math.sqrt(1 - self.rho**4)


def elliptical_to_wl(p: EllipticalParams) -> tuple[WlParams, complex]:
    """Map elliptical parameters to widely linear parameters and ``c_nu``."""
    a, th, rho = p.a, p.theta, p.rho
    plus = 1 / rho**2 + rho**2
    minus = 1 / rho**2 - rho**2
    s, c = math.sin(th), math.cos(th)
    lam = a * math.sqrt(c * c + 0.25 * s * s * plus * plus)
    alpha = math.atan2(0.5 * s * plus, c)
    gamma = 0.5 * a * abs(s) * minus
    phi = wrap_angle(2 * p.psi - _sign(th) * math.pi / 2)
    sigma2_nu = p.sigma2_eps * plus
    c_nu = p.sigma2_eps * minus * complex(math.cos(2 * p.psi), math.sin(2 * p.psi))
    return WlParams(lam, alpha, gamma, phi, sigma2_nu), c_nu


def validity_margin(p: WlParams) -> float:
    """``lambda |sin alpha| - gamma``; nonnegative for valid parameters."""
    return p.lam * abs(math.sin(p.alpha)) - p.gamma


def is_valid(p: WlParams) -> bool:
    return validity_margin(p) >= 0


def is_stationary(p: WlParams) -> bool:
    """True iff gamma <= lambda |sin alpha| and lambda^2 - gamma^2 < 1."""
    return is_valid(p) and p.lam**2 - p.gamma**2 < 1


def spectral_radius(p: WlParams) -> float:
    """Largest eigenvalue modulus of the bivariate transition matrix.

    The eigenvalues are ``lam cos(alpha) +/- sqrt(gamma^2 - lam^2 sin^2(alpha))``;
    for valid parameters both have modulus ``sqrt(lam^2 - gamma^2)``.
    """
    c = p.lam * math.cos(p.alpha)
    d = complex(p.gamma**2 - (p.lam * math.sin(p.alpha)) ** 2) ** 0.5
    return max(abs(c + d), abs(c - d))


def check_stable(p: WlParams) -> None:
    """Stationarity of the recursion itself, without the ellipse validity constraint."""
    if spectral_radius(p) >= 1:
        raise NonStationaryError("nonstationary")


def check_stationary(p: WlParams) -> None:
    if not is_valid(p):
        raise InvalidParameterError("invalid: eccentricity out of range")
    if p.lam**2 - p.gamma**2 >= 1:
        raise NonStationaryError("nonstationary")


def wl_to_elliptical(p: WlParams) -> EllipticalParams:
    """Inverse of :func:`elliptical_to_wl` for valid, stationary parameters."""
    if p.gamma > 0 and (p.lam == 0 or validity_margin(p) <= 0):
        raise InvalidParameterError("invalid: eccentricity out of range")
    check_stationary(p)
    lam, gamma = p.lam, p.gamma
    alpha = wrap_angle(p.alpha)
    abs_sin = abs(math.sin(alpha))
    a = math.sqrt(lam * lam - gamma * gamma)
    if gamma == 0:
        theta = alpha
    else:
        x = math.sqrt(lam * lam / (lam * lam - gamma * gamma)) * math.cos(alpha)
        theta = _sign(alpha) * math.acos(min(1.0, max(-1.0, x)))
    if gamma == 0 and abs_sin == 0:
        # isotropic limit: orientation is arbitrary
        return EllipticalParams(a, theta, 1.0, 0.0, p.sigma2_nu / 2)
    rho = ((lam * abs_sin - gamma) / (lam * abs_sin + gamma)) ** 0.25
    psi = wrap_orientation(p.phi / 2 + _sign(alpha) * math.pi / 4)
    sigma2_eps = p.sigma2_nu * math.sqrt(lam**2 * abs_sin**2 - gamma**2) / (2 * lam * abs_sin)
    return EllipticalParams(a, theta, rho, psi, sigma2_eps)


def eccentricity(p: WlParams) -> float:
    """Eccentricity sqrt(2 gamma / (lambda |sin alpha| + gamma)) in [0, 1)."""
    if p.gamma == 0:
        return 0.0
    if p.lam == 0 or validity_margin(p) <= 0:
        raise InvalidParameterError("invalid: eccentricity out of range")
    return math.sqrt(2 * p.gamma / (p.lam * abs(math.sin(p.alpha)) + p.gamma))


def orientation(p: WlParams) -> float:
    """Ellipse orientation psi in [0, pi)."""
    return wrap_orientation(p.phi / 2 + _sign(wrap_angle(p.alpha)) * math.pi / 4)


def implied_relation(p: WlParams) -> complex:
    """Noise relation c_nu tying the noise ellipse to the autoregression."""
    if p.gamma == 0:
        return 0j
    s = math.sin(p.alpha)
    if s == 0 or p.lam == 0:
        raise InvalidParameterError("invalid: gamma > 0 requires sin(alpha) != 0")
    mag = p.sigma2_nu * p.gamma / (p.lam * s)
    return mag * complex(math.cos(p.phi + math.pi / 2), math.sin(p.phi + math.pi / 2))


def proper_params(a: float, theta: float, sigma2_eps: float) -> WlParams:
    """Proper complex AR(1) ``a e^{i theta} Z_{t-1} + eps_t`` as WlParams."""
    return WlParams(a, theta, 0.0, 0.0, 2 * sigma2_eps)


def random_elliptical(rng, a_max: float = 0.995, rho_min: float = 0.05) -> EllipticalParams:
    """Draw a random valid parameter set (used by property tests and demos)."""
    rng = np.random.default_rng(rng)
    return EllipticalParams(
        a=float(rng.uniform(0.0, a_max)),
        theta=float(rng.uniform(-math.pi, math.pi)),
        rho=float(rng.uniform(rho_min, 1.0)),
        psi=float(rng.uniform(0.0, math.pi)),
        sigma2_eps=float(rng.uniform(0.1, 5.0)),
    )
