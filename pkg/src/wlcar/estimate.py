"""Maximum-likelihood estimation in the time domain (exact Gaussian likelihood)
and in the frequency domain (debiased Whittle likelihood).

The optimiser is a restarted Nelder-Mead simplex over an unconstrained
reparameterisation that keeps every iterate inside the validity region
``gamma < lambda |sin alpha|``; stationarity is enforced by rejection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from .complex_normal import SINGULAR_RTOL, _logpdf
from .errors import DataError, NumericalError, SingularCovarianceError, WlcarError
from .model import (
    WlParams,
    eccentricity,
    implied_relation,
    is_stationary,
    orientation,
    proper_params,
    wl_to_elliptical,
)
from .moments import expected_periodograms, fourier_frequencies, zero_lag_moments

METHODS = ("exact", "whittle")
MIN_FIT_LENGTH = 32
MAX_EVALS = 2000
XATOL = 1e-8
HESSIAN_STEP = 1e-4


@dataclass(frozen=True)
class FrequencyBand:
    """Closed frequency interval in radians per sample.

    The zero frequency is left out unless ``include_zero`` is set, because
    fitted signals are demeaned.
    """

    omega_min: float = -math.pi
    omega_max: float = math.pi
    include_zero: bool = False

    def __post_init__(self):
        if not (-math.pi <= self.omega_min < self.omega_max <= math.pi):
            raise ValueError(
                f"band must satisfy -pi <= min < max <= pi, got [{self.omega_min}, {self.omega_max}]"
            )

    @classmethod
    def from_pi_units(cls, lo: float, hi: float, include_zero: bool = False) -> "FrequencyBand":
        return cls(lo * math.pi, hi * math.pi, include_zero)

    def mask(self, n: int) -> np.ndarray:
        w = fourier_frequencies(n)
        tol = 1e-12
        m = (w >= self.omega_min - tol) & (w <= self.omega_max + tol)
        if not self.include_zero:
            m[0] = False
        return m

    def __str__(self):
        return f"[{self.omega_min / math.pi:.17g}pi,{self.omega_max / math.pi:.17g}pi]"


FULL_BAND = FrequencyBand()
SEISMIC_BAND = FrequencyBand(-math.pi / 4, math.pi / 4)


@dataclass
class FitResult:
    """Outcome of a maximum-likelihood fit.

    ``std_errors`` is ``None`` when the numerical Hessian at the optimum is
    not negative definite.  For proper fits the standard errors refer to
    ``(a, theta, sigma2_eps)``.
    """

    params: WlParams
    c_nu: complex
    loglik: float
    std_errors: dict | None
    band: FrequencyBand | None
    method: str
    converged: bool
    iterations: int
    n: int
    proper: bool = False
    covariance: np.ndarray | None = field(default=None, repr=False)

    @property
    def eccentricity(self) -> float:
        return eccentricity(self.params)

    @property
    def orientation(self) -> float:
        return orientation(self.params)

    @property
    def elliptical(self):
        return wl_to_elliptical(self.params)

    def summary(self) -> dict:
        out = {"method": self.method, "proper": self.proper, "n": self.n}
        out.update(self.params.as_dict())
        out.update(
            c_nu_re=self.c_nu.real,
            c_nu_im=self.c_nu.imag,
            loglik=self.loglik,
            eccentricity=self.eccentricity,
            orientation=self.orientation,
            converged=self.converged,
            iterations=self.iterations,
            band=str(self.band) if self.band is not None else "",
        )
        for k, v in (self.std_errors or {}).items():
            out[f"se_{k}"] = v
        return out


# -- likelihoods ---------------------------------------------------------------


def _check_signal(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim != 1 or z.size < 1:
        raise DataError("signal must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(z)):
        raise DataError("signal contains non-finite values")
    return z


def exact_loglik(p: WlParams, c_nu: complex, z) -> float:
    """Exact Gaussian log-likelihood, factorised with the Markov property.

    ``log p(z_0) + sum_t log p(z_t | z_{t-1})`` where the marginal is
    ``N_C(0, sigma2_Z, c_Z)`` and each transition is
    ``N_C(A z_{t-1} + B z*_{t-1}, sigma2_nu, c_nu)``.
    Returns ``-inf`` for nonstationary parameters.
    """
    z = _check_signal(z)
    return _exact(p, c_nu, z)


def _exact(p, c_nu, z):
    if not is_stationary(p):
        return -math.inf
    if p.sigma2_nu**2 - abs(c_nu) ** 2 <= SINGULAR_RTOL * p.sigma2_nu**2:
        raise SingularCovarianceError("singular complex-normal")
    try:
        s0, r0 = zero_lag_moments(p, c_nu)
    except NumericalError:
        return -math.inf
    if s0**2 - abs(r0) ** 2 <= SINGULAR_RTOL * s0**2:
        return -math.inf
    ll = float(_logpdf(z[:1], s0, r0)[0])
    if z.size > 1:
        A, B = p.coefficients
        prev = z[:-1]
        resid = z[1:] - A * prev - B * np.conj(prev)
        ll += float(np.sum(_logpdf(resid, p.sigma2_nu, c_nu)))
    return ll


class _WhittleData:
    """DFT and band selection for one signal, reused across evaluations."""

    def __init__(self, z, band: FrequencyBand):
        n = z.size
        self.n = n
        self.mask = band.mask(n)
        if self.mask.sum() < 5:
            raise ValueError("band must contain at least 5 Fourier frequencies")
        J = np.fft.fft(z) / np.sqrt(n)
        self.neg = (-np.arange(n)) % n
        self.x = J[self.mask]
        self.xn = J[self.neg][self.mask]
        self.I = np.abs(self.x) ** 2
        self.In = np.abs(self.xn) ** 2
        self.C = self.x * self.xn

    def terms(self, p, c_nu) -> np.ndarray:
        spec = expected_periodograms(p, c_nu, self.n)
        Sp = spec.Sbar[self.mask]
        Sm = spec.Sbar[self.neg][self.mask]
        R = spec.Rbar[self.mask]
        det = Sp * Sm - np.abs(R) ** 2
        if np.any(det <= SINGULAR_RTOL * np.abs(Sp * Sm)) or np.any(Sp <= 0):
            raise NumericalError("spectral matrix is singular at a retained frequency")
        quad = (Sm * self.I + Sp * self.In - 2 * np.real(R * np.conj(self.C))) / det
        # the 2x2 blocks at omega and -omega are permutations of each other,
        # so every frequency pair would be counted twice without the 1/2
        return -0.5 * (np.log(det) + quad)

    def loglik(self, p, c_nu) -> float:
        if not is_stationary(p):
            return -math.inf
        try:
            return float(np.sum(self.terms(p, c_nu)))
        except NumericalError:
            return -math.inf


def whittle_loglik(p: WlParams, c_nu: complex, z, band: FrequencyBand = FULL_BAND) -> float:
    """Debiased Whittle log-likelihood restricted to the Fourier frequencies in ``band``.

    Uses the 2x2 spectral matrix of expected periodogram and expected
    complementary periodogram, so finite-sample DFT bias is removed.
    """
    z = _check_signal(z)
    data = _WhittleData(z, band)
    if not is_stationary(p):
        return -math.inf
    return float(np.sum(data.terms(p, c_nu)))


def whittle_terms(p: WlParams, c_nu: complex, z, band: FrequencyBand = FULL_BAND) -> np.ndarray:
    """Per-frequency contributions to :func:`whittle_loglik` (band order = FFT order)."""
    return _WhittleData(_check_signal(z), band).terms(p, c_nu)


def _loglik_function(z, method, band):
    if method == "exact":
        return lambda p, c: _exact(p, c, z)
    if method == "whittle":
        data = _WhittleData(z, band)
        return data.loglik
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


# -- reparameterisations -------------------------------------------------------
#
# full model: x = (log lam, alpha, w_re, w_im, log sigma2_nu) with
#   gamma e^{i phi} = lam |sin alpha| * tanh(|w|) / |w| * w
# which is smooth through gamma = 0.  proper model: x = (logit a, theta, log sigma2_eps).

_X_CLIP = 30.0


def _full_from_x(x) -> WlParams:
    lam = math.exp(min(x[0], _X_CLIP))
    alpha = x[1]
    w = complex(x[2], x[3])
    r = abs(w)
    ratio = math.tanh(r) / r if r > 1e-12 else 1.0
    b = lam * abs(math.sin(alpha)) * ratio * w
    gamma = abs(b)
    phi = math.atan2(b.imag, b.real) if gamma > 0 else 0.0
    return WlParams(lam, alpha, gamma, phi, math.exp(max(min(x[4], _X_CLIP), -_X_CLIP)))


def _full_to_x(p: WlParams) -> np.ndarray:
    cap = p.lam * abs(math.sin(p.alpha))
    q = 0.0 if cap == 0 else min(p.gamma / cap, 1 - 1e-9)
    r = math.atanh(q)
    return np.array(
        [math.log(max(p.lam, 1e-12)), p.alpha, r * math.cos(p.phi), r * math.sin(p.phi), math.log(p.sigma2_nu)]
    )


def _proper_from_x(x) -> WlParams:
    return proper_params(float(expit(x[0])), x[1], math.exp(max(min(x[2], _X_CLIP), -_X_CLIP)))


def _proper_to_x(a, theta, sigma2_eps) -> np.ndarray:
    a = min(max(a, 1e-6), 1 - 1e-6)
    return np.array([float(logit(a)), theta, math.log(sigma2_eps)])


# -- optimisation --------------------------------------------------------------


def _nelder_mead(f, x0, steps, restarts=3):
    x = np.asarray(x0, dtype=float)
    fx = f(x)
    iters = 0
    converged = False
    for attempt in range(restarts + 1):
        scale = 1.0 if attempt == 0 else 0.1
        simplex = np.vstack([x, x + np.diag(np.asarray(steps) * scale)])
        res = minimize(
            f,
            x,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": XATOL, "fatol": np.inf, "maxfev": MAX_EVALS},
        )
        iters += int(res.nit)
        improved = fx - res.fun
        if res.fun <= fx:
            x, fx = res.x, res.fun
        converged = bool(res.success)
        if converged and improved < 1e-9 * max(1.0, abs(fx)):
            break
    return x, fx, converged, iters


def _demean(z):
    z = _check_signal(z)
    z = z - z.mean()
    if not np.any(np.abs(z) > 0) or np.max(np.abs(z)) <= 1e-14 * max(1.0, np.max(np.abs(z))):
        raise DataError("degenerate signal")
    return z


def _ls_proper(z):
    prev, cur = z[:-1], z[1:]
    g = np.vdot(prev, cur) / np.vdot(prev, prev)
    resid = cur - g * prev
    return min(abs(g), 0.98), float(np.angle(g)), max(float(np.mean(np.abs(resid) ** 2)) / 2, 1e-12)


def _ls_widely_linear(z):
    """Conditional least-squares fit of ``z_t`` on ``(z_{t-1}, z*_{t-1})``."""
    prev, cur = z[:-1], z[1:]
    X = np.column_stack([prev, np.conj(prev)])
    (A, B), *_ = np.linalg.lstsq(X, cur, rcond=None)
    resid = cur - X @ np.array([A, B])
    lam, alpha = abs(A), float(np.angle(A))
    cap = lam * abs(math.sin(alpha))
    gamma = min(abs(B), 0.9 * cap)
    p = WlParams(lam, alpha, gamma, float(np.angle(B)), max(float(np.mean(np.abs(resid) ** 2)), 1e-12))
    return p if is_stationary(p) else None


def fit_proper(z, method: str = "whittle", band: FrequencyBand = FULL_BAND) -> FitResult:
    """Fit the proper complex AR(1) model (gamma = 0, c_nu = 0)."""
    z = _demean(z)
    if z.size < 8:
        raise DataError("signal too short for a proper AR(1) fit")
    ll = _loglik_function(z, method, band)

    def negll(x):
        v = ll(_proper_from_x(x), 0j)
        return -v if np.isfinite(v) else np.inf

    x0 = _proper_to_x(*_ls_proper(z))
    x, fx, converged, iters = _nelder_mead(negll, x0, [0.5, 0.2, 0.3])
    p = _proper_from_x(x).canonical()
    a, theta, s2e = p.lam, p.alpha, p.sigma2_nu / 2

    def nat_ll(v):
        if v[0] < 0 or v[0] >= 1 or v[2] <= 0:
            return -math.inf
        return ll(proper_params(v[0], v[1], v[2]), 0j)

    cov, se = _hessian_errors(nat_ll, np.array([a, theta, s2e]), ("a", "theta", "sigma2_eps"))
    return FitResult(p, 0j, -fx, se, band if method == "whittle" else None, method, converged,
                     iters, z.size, proper=True, covariance=cov)


def fit(z, method: str = "whittle", band: FrequencyBand = FULL_BAND, init: WlParams | None = None,
        proper_fit: FitResult | None = None) -> FitResult:
    """Fit the five-parameter widely linear complex AR(1) model by maximum likelihood.

    Parameters
    ----------
    z : array_like of complex
        Observed signal (demeaned internally).
    method : {"whittle", "exact"}
        Debiased Whittle (frequency domain) or exact time-domain likelihood.
    band : FrequencyBand
        Frequencies retained by the Whittle likelihood; ignored for "exact".
    init : WlParams, optional
        Extra starting point, e.g. the optimum of a neighbouring window.
    proper_fit : FitResult, optional
        Previously computed :func:`fit_proper` result on the same data,
        method and band; computed here when omitted.

    Returns
    -------
    FitResult
    """
    z = _demean(z)
    if z.size < MIN_FIT_LENGTH:
        raise DataError(f"need at least {MIN_FIT_LENGTH} samples for the five-parameter fit")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    ll = _loglik_function(z, method, band)

    def full_ll(p):
        try:
            return ll(p, implied_relation(p))
        except (WlcarError, ValueError):
            return -math.inf

    def negll(x):
        v = full_ll(_full_from_x(x))
        return -v if np.isfinite(v) else np.inf

    if proper_fit is None:
        proper_fit = fit_proper(z, method, band)
    pp = proper_fit.params
    candidates = [
        WlParams(pp.lam, pp.alpha, 0.0, 0.0, pp.sigma2_nu),
        WlParams(pp.lam, pp.alpha, 0.1 * pp.lam * abs(math.sin(pp.alpha)), 0.0, pp.sigma2_nu),
    ]
    ls = _ls_widely_linear(z)
    if ls is not None:
        candidates.append(ls)
    if init is not None:
        candidates.append(init)
    starts = [_full_to_x(c) for c in candidates]
    values = [negll(x) for x in starts]
    x0 = starts[int(np.argmin(values))]
    x, fx, converged, iters = _nelder_mead(negll, x0, [0.05, 0.1, 0.3, 0.3, 0.1])
    p = _full_from_x(x).canonical()
    names = ("lambda", "alpha", "gamma", "phi", "sigma2_nu")
    cov, se = _hessian_errors(lambda v: _extended_ll(full_ll, v), np.array(p.as_tuple()), names)
    return FitResult(p, implied_relation(p), -fx, se, band if method == "whittle" else None, method,
                     converged, iters, z.size, covariance=cov)


def _extended_ll(full_ll, v):
    lam, alpha, gamma, phi, s2 = v
    if gamma < 0:
        # (gamma, phi) and (-gamma, phi + pi) describe the same process
        gamma, phi = -gamma, phi + math.pi
    if lam < 0 or s2 <= 0:
        return -math.inf
    return full_ll(WlParams(lam, alpha, gamma, phi, s2))


def hessian(f, x, rel_step: float = HESSIAN_STEP) -> np.ndarray:
    """Central-difference Hessian of ``f`` at ``x`` with relative steps."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 0.1)
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def _hessian_errors(f, x, names):
    H = hessian(f, x)
    if not np.all(np.isfinite(H)):
        return None, None
    info = -H
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        return None, None
    cov = np.linalg.inv(info)
    return cov, dict(zip(names, np.sqrt(np.diag(cov)).tolist()))
