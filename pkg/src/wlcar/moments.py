"""Exact second-order structure: covariance/relation sequences and
expected (complementary) periodograms.

Conventions: ``s_tau = E{Z_t Z*_{t+tau}}`` and ``r_tau = E{Z_t Z_{t+tau}}``.
Fourier frequencies are ``omega_k = 2 pi k / n`` for ``k = 0..n-1`` (FFT
order), reported wrapped into (-pi, pi].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import NumericalError
from .model import WlParams, check_stable

COND_LIMIT = 1e12


@dataclass(frozen=True)
class MomentSequences:
    """Covariance ``s`` and relation ``r`` at lags ``0..max_lag``."""

    s: np.ndarray
    r: np.ndarray

    @property
    def max_lag(self) -> int:
        return len(self.s) - 1

    def covariance(self, tau: int) -> complex:
        return self.s[tau] if tau >= 0 else np.conj(self.s[-tau])

    def relation(self, tau: int) -> complex:
        return self.r[abs(tau)]


@dataclass(frozen=True)
class SpectralMatrices:
    """Expected periodogram ``Sbar`` and complementary periodogram ``Rbar``.

    ``Sbar[k] = E|J(omega_k)|^2`` and ``Rbar[k] = E{J(omega_k) J(-omega_k)}``
    with ``J(omega) = n^{-1/2} sum_t Z_t e^{-i omega t}``.
    """

    freqs: np.ndarray
    Sbar: np.ndarray
    Rbar: np.ndarray

    @property
    def n(self) -> int:
        return len(self.freqs)

    def negative_index(self) -> np.ndarray:
        return (-np.arange(self.n)) % self.n


def fourier_frequencies(n: int) -> np.ndarray:
    """``2 pi k / n`` wrapped into (-pi, pi], in FFT order."""
    k = np.arange(n)
    k = np.where(k > n // 2, k - n, k)
    return 2 * np.pi * k / n


def zero_lag_matrix(p: WlParams) -> np.ndarray:
    lam, al, ga, ph = p.lam, p.alpha, p.gamma, p.phi
    e = np.exp
    return np.array(
        [
            [1 - lam**2 - ga**2, -lam * ga * e(1j * (al - ph)), -lam * ga * e(1j * (ph - al))],
            [-2 * lam * ga * e(1j * (al + ph)), 1 - lam**2 * e(2j * al), -(ga**2) * e(2j * ph)],
            [-2 * lam * ga * e(-1j * (al + ph)), -(ga**2) * e(-2j * ph), 1 - lam**2 * e(-2j * al)],
        ]
    )


def zero_lag_moments(p: WlParams, c_nu: complex) -> tuple[float, complex]:
    """Stationary variance ``sigma2_Z`` and relation ``c_Z`` at lag zero.

    Solves the 3x3 linear system for ``(sigma2_Z, c_Z, c_Z^*)``.  Only
    stability of the recursion is required, so ``c_nu`` may be chosen freely
    (seven-parameter model).
    """
    check_stable(p)
    M = zero_lag_matrix(p)
    if np.linalg.cond(M) > COND_LIMIT:
        raise NumericalError("near-nonstationary: moments unavailable")
    rhs = np.array([p.sigma2_nu, c_nu, np.conj(c_nu)], dtype=complex)
    sol = np.linalg.solve(M, rhs)
    scale = max(abs(sol[0]), 1e-300)
    if abs(sol[2] - np.conj(sol[1])) > 1e-10 * scale or abs(sol[0].imag) > 1e-10 * scale:
        raise NumericalError("zero-lag solution is not self-consistent")
    if sol[0].real <= 0:
        raise NumericalError("near-nonstationary: moments unavailable")
    return float(sol[0].real), complex(sol[1])


def moment_sequences(p: WlParams, c_nu: complex, max_lag: int) -> MomentSequences:
    """Covariance and relation sequences at lags ``0..max_lag``.

    The coupled first-order recursion

        s_tau = lam e^{-i alpha} s_{tau-1} + gamma e^{-i phi} r_{tau-1}
        r_tau = lam e^{i alpha} r_{tau-1} + gamma e^{i phi} s_{tau-1}

    is a 2x2 linear map with trace ``2 lam cos(alpha)`` and determinant
    ``lam^2 - gamma^2``, so each sequence also obeys the scalar second-order
    recursion given by its characteristic polynomial.  That form is run
    through an IIR filter, which keeps the cost O(max_lag) without a Python
    loop.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    s0, r0 = zero_lag_moments(p, c_nu)
    if max_lag == 0:
        return MomentSequences(np.array([s0], dtype=complex), np.array([r0]))
    A, B = p.coefficients
    s1 = np.conj(A) * s0 + np.conj(B) * r0
    r1 = A * r0 + B * s0
    tr = 2 * p.lam * np.cos(p.alpha)
    det = p.lam**2 - p.gamma**2
    den = [1.0, -tr, det]
    n = max_lag + 1
    xs = np.zeros(n, dtype=complex)
    xr = np.zeros(n, dtype=complex)
    xs[0], xs[1] = s0, s1 - tr * s0
    xr[0], xr[1] = r0, r1 - tr * r0
    return MomentSequences(lfilter([1.0], den, xs), lfilter([1.0], den, xr))


def triangle_weights(n: int) -> np.ndarray:
    return 1 - np.arange(n) / n


def periodograms_from_sequences(s: np.ndarray, r: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Kernel-weighted transforms of lags ``0..n-1`` onto the n-point grid."""
    w = triangle_weights(n)
    ws = w * s[:n]
    wr = w * r[:n]
    # sum over tau in (-(n-1), n-1), using s_{-tau} = s_tau^* and r_{-tau} = r_tau
    S = 2 * np.real(n * np.fft.ifft(ws)) - ws[0].real
    R = np.fft.fft(wr) + n * np.fft.ifft(wr) - wr[0]
    return S, R


def expected_periodograms(p: WlParams, c_nu: complex, n: int) -> SpectralMatrices:
    """Expected periodogram and complementary periodogram for length ``n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    seq = moment_sequences(p, c_nu, n - 1)
    S, R = periodograms_from_sequences(seq.s, seq.r, n)
    return SpectralMatrices(fourier_frequencies(n), S, R)


def periodograms(z) -> tuple[np.ndarray, np.ndarray]:
    """Periodogram ``|J(omega_k)|^2`` and complementary periodogram
    ``J(omega_k) J(-omega_k)`` of ``z`` along its last axis."""
    z = np.asarray(z)
    n = z.shape[-1]
    J = np.fft.fft(z, axis=-1) / np.sqrt(n)
    Jneg = J[..., (-np.arange(n)) % n]
    return np.abs(J) ** 2, J * Jneg
