"""Impropriety testing and nonparametric ellipse estimates.

* likelihood-ratio test of the proper AR(1) null against the widely linear
  alternative, referred to a chi-squared distribution with 2 degrees of freedom;
* Benjamini-Hochberg step-up procedure across segments;
* peak-based eccentricity/orientation estimates from the DFT.

The BH procedure assumes independent tests.  Neighbouring segments of one
signal are mildly (positively) dependent, which makes the procedure
conservative; no dependency correction is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DataError, NumericalError
from .estimate import FULL_BAND, FitResult, FrequencyBand, fit, fit_proper
from .model import WlParams, eccentricity, wrap_orientation

CHI2_2_CRITICAL_05 = 2 * math.log(20)  # 5.991464547...
W_CLAMP = 1e-8
CIRCULAR_RTOL = 1e-12


@dataclass(frozen=True)
class LrTestResult:
    W: float
    p_value: float
    reject_at_05: bool
    alt: FitResult | None = None
    null: FitResult | None = None


@dataclass(frozen=True)
class FdrDecision:
    p_values: tuple
    threshold_index: int  # j: number of rejections
    rejected: frozenset
    level: float = 0.05

    def is_rejected(self, i: int) -> bool:
        return i in self.rejected


def chi2_2_sf(w: float) -> float:
    """Survival function of the chi-squared distribution with 2 dof: exp(-w/2)."""
    if w < 0:
        raise ValueError("chi-squared statistic must be nonnegative")
    return math.exp(-w / 2)


def lr_statistic(alt_loglik: float, null_loglik: float) -> float:
    W = 2 * (alt_loglik - null_loglik)
    if W < 0:
        if W >= -W_CLAMP * max(1.0, abs(alt_loglik)):
            return 0.0
        raise NumericalError(f"negative likelihood-ratio statistic {W:.3g}: alternative fit did not reach the null optimum")
    return W


def lr_test(z, band: FrequencyBand = FULL_BAND, method: str = "whittle", level: float = 0.05) -> LrTestResult:
    """Test propriety (gamma = 0) against the widely linear alternative.

    ``W = 2 (l_alt - l_null)`` with both models fitted on the same data,
    method and band; ``p = exp(-W / 2)``.
    """
    null = fit_proper(z, method, band)
    alt = fit(z, method, band, proper_fit=null)
    if not (null.converged and alt.converged):
        raise NumericalError(
            f"optimizer did not converge (null: {null.converged}, {null.iterations} it; "
            f"alt: {alt.converged}, {alt.iterations} it)"
        )
    W = lr_statistic(alt.loglik, null.loglik)
    p = chi2_2_sf(W)
    return LrTestResult(W, p, p < level, alt, null)


def bh_fdr(p_values, level: float = 0.05) -> FdrDecision:
    """Benjamini-Hochberg step-up procedure.

    Finds the largest ``j`` with ``p_(j) <= level * j / m`` and rejects the
    hypotheses with the ``j`` smallest p-values.
    """
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise ValueError("p_values must be one-dimensional")
    if np.any((p < 0) | (p > 1)) or np.any(~np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ok = p[order] <= level * np.arange(1, m + 1) / m
    j = int(np.nonzero(ok)[0][-1] + 1) if ok.any() else 0
    return FdrDecision(tuple(p.tolist()), j, frozenset(order[:j].tolist()), level)


def segment_bounds(n: int, m: int) -> list[tuple[int, int]]:
    """Partition ``range(n)`` into ``m`` contiguous, non-overlapping windows."""
    if m < 1 or m > n:
        raise ValueError("number of segments must lie in [1, n]")
    edges = np.linspace(0, n, m + 1).round().astype(int)
    return list(zip(edges[:-1].tolist(), edges[1:].tolist()))


def _segment_test(args):
    z, band, method, level = args
    return lr_test(z, band, method, level)


def segment_tests(z, segments, band: FrequencyBand = FULL_BAND, method: str = "whittle",
                  level: float = 0.05, threads: int = 1):
    """LR test on each ``(start, stop)`` segment followed by BH-FDR.

    Returns ``(results, decision)``.
    """
    z = np.asarray(z)
    jobs = [(z[a:b], band, method, level) for a, b in segments]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_segment_test, jobs))
    else:
        results = [_segment_test(j) for j in jobs]
    return results, bh_fdr([r.p_value for r in results], level)


# -- nonparametric peak estimates ----------------------------------------------


def peak_estimates(z, rtol: float = 1e-9) -> tuple[float, float]:
    """Eccentricity and orientation from the DFT at the spectral peak pair.

    The peak ``omega_max`` is the strictly positive frequency whose pair
    ``(omega_max, -omega_max)`` holds the largest single-sided power
    ``|J(omega)|^2``; the pair is grid exact.  Then

        eps = 2 sqrt(|J(w) J(-w)|) / (|J(w)| + |J(-w)|)
        psi = (arg J(w) + arg J(-w)) / 2   (mod pi)

    Raises
    ------
    DataError
        If the spectrum has no unique dominant peak pair.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    if n < 8:
        raise DataError("need at least 8 samples for peak estimates")
    J = np.fft.fft(z) / np.sqrt(n)
    # positive frequencies strictly below Nyquist, so each has a distinct mirror
    k = np.arange(1, (n - 1) // 2 + 1)
    pos, neg = np.abs(J[k]), np.abs(J[n - k])
    power = np.maximum(pos, neg) ** 2
    top = int(np.argmax(power))
    rest = np.delete(power, top)
    if power[top] <= 0 or (rest.size and rest.max() >= power[top] * (1 - rtol)):
        raise DataError("no dominant oscillation")
    jp, jn = J[k[top]], J[n - k[top]]
    mp, mn = abs(jp), abs(jn)
    ecc = 2 * math.sqrt(mp * mn) / (mp + mn)
    # a circle has no orientation; report 0 once the weaker peak is at roundoff level
    circular = min(mp, mn) <= CIRCULAR_RTOL * max(mp, mn)
    psi = 0.0 if circular else wrap_orientation(0.5 * (np.angle(jp) + np.angle(jn)))
    return min(ecc, 1.0), psi


# -- confidence intervals for derived quantities -------------------------------


def ellipse_intervals(result: FitResult, level: float = 0.95) -> tuple[float, float]:
    """Half-widths of normal confidence intervals for eccentricity and orientation.

    Delta method on the Hessian covariance of ``(lambda, alpha, gamma, phi,
    sigma2_nu)``; NaN when that covariance is unavailable.
    """
    if result.covariance is None or result.proper:
        return math.nan, math.nan
    zq = float(norm.ppf(0.5 + level / 2))
    x = np.array(result.params.as_tuple())
    h = 1e-6 * np.maximum(np.abs(x), 0.1)

    def ecc(v):
        return eccentricity(WlParams(v[0], v[1], abs(v[2]), v[3], v[4]))

    grad_e = np.zeros(5)
    for i in (0, 1, 2):
        d = np.zeros(5)
        d[i] = h[i]
        try:
            grad_e[i] = (ecc(x + d) - ecc(x - d)) / (2 * h[i])
        except Exception:
            return math.nan, math.nan
    # psi = phi / 2 + const, away from alpha = 0
    grad_p = np.array([0, 0, 0, 0.5, 0])
    cov = result.covariance
    se_e = math.sqrt(max(grad_e @ cov @ grad_e, 0.0))
    se_p = math.sqrt(max(grad_p @ cov @ grad_p, 0.0))
    return zq * se_e, zq * se_p
