"""Sliding-window model fits: parameter tracks, confidence-interval tracks,
likelihood-ratio track and data/model spectrograms."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import WlcarError
from .estimate import SEISMIC_BAND, FrequencyBand, fit, fit_proper
from .inference import ellipse_intervals, lr_statistic
from .moments import expected_periodograms, fourier_frequencies, periodograms

log = logging.getLogger(__name__)

PARAM_NAMES = ("lambda", "alpha", "gamma", "phi", "sigma2_nu")


@dataclass(frozen=True)
class RollingConfig:
    """Window length and hop in samples; ``smooth_width`` is for display tracks only.

    With ``warm_start`` each fit also starts from the previous window's
    optimum, which forces sequential execution.
    """

    window_len: int = 161
    hop: int = 1
    band: FrequencyBand = SEISMIC_BAND
    method: str = "whittle"
    smooth_width: int = 11
    warm_start: bool = True

    def __post_init__(self):
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")
        if self.hop < 1:
            raise ValueError("hop must be at least 1")
        if self.smooth_width < 1 or self.smooth_width % 2 == 0:
            raise ValueError("smooth_width must be a positive odd integer")


@dataclass
class TrackSet:
    """One row per window position (indexed by the window's center sample).

    Spectrogram matrices are frequency x window on the band's Fourier grid
    (``freqs`` ascending).  Rows of failed windows hold NaN.
    """

    centers: np.ndarray
    fits: list
    params: np.ndarray
    eccentricity: np.ndarray
    orientation: np.ndarray
    ecc_ci: np.ndarray
    psi_ci: np.ndarray
    loglik: np.ndarray
    W: np.ndarray
    converged: np.ndarray
    freqs: np.ndarray
    spec_data: np.ndarray
    spec_model: np.ndarray
    cspec_data: np.ndarray
    cspec_model: np.ndarray
    config: RollingConfig = field(default_factory=RollingConfig)

    def __len__(self):
        return len(self.centers)

    def track(self, name: str) -> np.ndarray:
        if name in PARAM_NAMES:
            return self.params[:, PARAM_NAMES.index(name)]
        return getattr(self, name)

    def smoothed(self, width: int | None = None) -> dict:
        """Moving-average display tracks; orientation is averaged on the doubled-angle circle."""
        width = width or self.config.smooth_width
        width = min(width, len(self) if len(self) % 2 else len(self) - 1)
        width = max(width, 1)
        out = {name: moving_average(self.track(name), width) for name in
               ("eccentricity", "ecc_ci", "psi_ci", "W", *PARAM_NAMES)}
        two = 2 * self.orientation
        c = moving_average(np.cos(two), width)
        s = moving_average(np.sin(two), width)
        out["orientation"] = np.mod(0.5 * np.arctan2(s, c), np.pi)
        return out


def moving_average(track, width: int) -> np.ndarray:
    """Centered moving average; edges use shrinking symmetric windows.

    NaN entries are ignored within each window.
    """
    x = np.asarray(track, dtype=float)
    n = x.size
    if width < 1 or width % 2 == 0:
        raise ValueError("width must be a positive odd integer")
    if width > n:
        raise ValueError("width must not exceed the track length")
    if width == 1:
        return x.copy()
    h = width // 2
    ok = np.isfinite(x)
    cs = np.concatenate([[0.0], np.cumsum(np.where(ok, x, 0.0))])
    cn = np.concatenate([[0], np.cumsum(ok)])
    i = np.arange(n)
    half = np.minimum(h, np.minimum(i, n - 1 - i))
    lo, hi = i - half, i + half + 1
    count = cn[hi] - cn[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (cs[hi] - cs[lo]) / count
    out[count == 0] = np.nan
    return out


def window_starts(n: int, cfg: RollingConfig) -> np.ndarray:
    if n < cfg.window_len:
        raise ValueError(f"signal length {n} is shorter than the window ({cfg.window_len})")
    return np.arange(0, n - cfg.window_len + 1, cfg.hop)


def _fit_window(zw, cfg: RollingConfig, init=None):
    """Fit null and alternative on one window; one retry from the default start."""
    for attempt_init in ((init, None) if init is not None else (None,)):
        try:
            null = fit_proper(zw, cfg.method, cfg.band)
            alt = fit(zw, cfg.method, cfg.band, init=attempt_init, proper_fit=null)
            if alt.converged:
                return alt, null
        except WlcarError as exc:
            log.debug("window fit failed: %s", exc)
    return None, None


def _fit_job(args):
    return _fit_window(*args)


def roll(z, cfg: RollingConfig = RollingConfig(), threads: int = 1) -> TrackSet:
    """Fit the model on every window of ``z`` and collect tracks and spectrograms."""
    z = np.asarray(z, dtype=complex)
    starts = window_starts(z.size, cfg)
    L = cfg.window_len
    windows = [z[s:s + L] - z[s:s + L].mean() for s in starts]

    if cfg.warm_start or threads <= 1:
        results = []
        prev = None
        for zw in windows:
            alt, null = _fit_window(zw, cfg, prev.params if (cfg.warm_start and prev is not None) else None)
            results.append((alt, null))
            if alt is not None:
                prev = alt
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_fit_job, [(zw, cfg, None) for zw in windows]))

    mask = cfg.band.mask(L)
    idx = np.nonzero(mask)[0]
    freqs_all = fourier_frequencies(L)
    order = idx[np.argsort(freqs_all[idx])]
    nw, nf = len(windows), order.size

    params = np.full((nw, 5), np.nan)
    ecc = np.full(nw, np.nan)
    psi = np.full(nw, np.nan)
    ecc_ci = np.full(nw, np.nan)
    psi_ci = np.full(nw, np.nan)
    loglik = np.full(nw, np.nan)
    W = np.full(nw, np.nan)
    conv = np.zeros(nw, dtype=bool)
    spec_data = np.empty((nf, nw))
    cspec_data = np.empty((nf, nw))
    spec_model = np.full((nf, nw), np.nan)
    cspec_model = np.full((nf, nw), np.nan)
    fits = []

    for j, (zw, (alt, null)) in enumerate(zip(windows, results)):
        I, C = periodograms(zw)
        spec_data[:, j] = I[order]
        cspec_data[:, j] = np.abs(C[order])
        fits.append(alt)
        if alt is None:
            continue
        params[j] = alt.params.as_tuple()
        ecc[j] = alt.eccentricity
        psi[j] = alt.orientation
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ecc_ci[j], psi_ci[j] = ellipse_intervals(alt)
        loglik[j] = alt.loglik
        try:
            W[j] = lr_statistic(alt.loglik, null.loglik)
        except WlcarError:
            pass
        conv[j] = alt.converged
        spec = expected_periodograms(alt.params, alt.c_nu, L)
        spec_model[:, j] = spec.Sbar[order]
        cspec_model[:, j] = np.abs(spec.Rbar[order])

    return TrackSet(
        centers=starts + L // 2,
        fits=fits,
        params=params,
        eccentricity=ecc,
        orientation=psi,
        ecc_ci=ecc_ci,
        psi_ci=psi_ci,
        loglik=loglik,
        W=W,
        converged=conv,
        freqs=freqs_all[order],
        spec_data=spec_data,
        spec_model=spec_model,
        cspec_data=cspec_data,
        cspec_model=cspec_model,
        config=cfg,
    )


def to_decibels(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10 * np.log10(np.asarray(x, dtype=float))
