import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from wlcar.errors import DataError, NumericalError
from wlcar.estimate import SEISMIC_BAND, fit
from wlcar.inference import (
    CHI2_2_CRITICAL_05,
    bh_fdr,
    chi2_2_sf,
    ellipse_intervals,
    lr_statistic,
    lr_test,
    peak_estimates,
    segment_bounds,
    segment_tests,
)
from wlcar.simulate import proper_car1, simulate_wlcar1

from oracles import BH_CASES, ellipse

@pytest.mark.parametrize("p,level,expected", BH_CASES)
def test_bh_hand_cases(p, level, expected):
    d = bh_fdr(p, level)
    assert set(d.rejected) == expected
    assert d.threshold_index == len(expected)


def test_bh_ties_stable():
    d = bh_fdr([0.02, 0.02, 0.02], 0.05)
    assert d.rejected == {0, 1, 2}


def test_bh_rejects_bad_input():
    with pytest.raises(ValueError):
        bh_fdr([0.1, 1.2])
    with pytest.raises(ValueError):
        bh_fdr([math.nan])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.integers(0, 29), st.floats(0, 1))
def test_bh_monotone(p, i, factor):
    # lowering one p-value never removes a rejection
    i = i % len(p)
    before = bh_fdr(p).rejected
    q = list(p)
    q[i] *= factor
    assert before <= bh_fdr(q).rejected


def test_chi2_survival():
    assert abs(chi2_2_sf(5.991464547) - 0.05) < 1e-9
    assert chi2_2_sf(CHI2_2_CRITICAL_05) == pytest.approx(0.05, abs=1e-15)
    for w in (0.0, 0.3, 2.0, 13.0):
        assert chi2_2_sf(w) == pytest.approx(chi2.sf(w, 2), rel=1e-12)
    with pytest.raises(ValueError):
        chi2_2_sf(-1.0)


def test_lr_statistic_clamp():
    assert lr_statistic(-100.0, -100.0 + 1e-9) == 0.0
    assert lr_statistic(-90.0, -100.0) == 20.0
    with pytest.raises(NumericalError):
        lr_statistic(-101.0, -100.0)


def test_segment_bounds():
    assert segment_bounds(10, 3) == [(0, 3), (3, 7), (7, 10)]
    b = segment_bounds(1001, 11)
    assert b[0][0] == 0 and b[-1][1] == 1001
    assert all(x[1] == y[0] for x, y in zip(b, b[1:]))
    with pytest.raises(ValueError):
        segment_bounds(5, 6)


def test_lr_detects_impropriety(ref_process):
    p, c = ref_process
    r = lr_test(simulate_wlcar1(p, c, 2048, 4))
    assert r.reject_at_05 and r.W > 20


def test_lr_null_nonnegative():
    r = lr_test(proper_car1(0.9, 0.5, 1.0, 512, 6), SEISMIC_BAND)
    assert r.W >= 0 and 0 < r.p_value <= 1
    assert r.null.proper and not r.alt.proper


def test_segment_tests_shape():
    z = proper_car1(0.9, 0.5, 1.0, 400, 2)
    results, decision = segment_tests(z, segment_bounds(400, 3), method="exact")
    assert len(results) == 3
    assert len(decision.p_values) == 3


@pytest.mark.parametrize("eps", [0.0, 0.3, 0.6, 0.9, 0.999])
@pytest.mark.parametrize("psi", [0.0, 0.7, 1.6, 2.9])
def test_peak_estimates_ellipses(eps, psi):
    e, s = peak_estimates(ellipse(eps, psi))
    assert abs(e - eps) < 0.02
    if eps > 0.1:
        d = (s - psi + math.pi / 2) % math.pi - math.pi / 2
        assert abs(d) < 0.02


def test_peak_circle_orientation_is_zero():
    e, s = peak_estimates(ellipse(0.0, 1.0))
    assert e < 1e-6 and s == 0.0


def test_peak_linear_oscillation():
    e, s = peak_estimates(ellipse(1.0, 0.4))
    assert e == pytest.approx(1.0, abs=1e-12)
    assert s == pytest.approx(0.4, abs=1e-10)


def test_peak_rotation_and_conjugation():
    z = ellipse(0.7, 0.5, k=20) + 0.01 * np.exp(0.2j * np.arange(1024))
    e, s = peak_estimates(z)
    e2, s2 = peak_estimates(z * np.exp(0.4j))
    assert e2 == pytest.approx(e, abs=1e-10)
    assert s2 == pytest.approx((s + 0.4) % math.pi, abs=1e-10)
    e3, s3 = peak_estimates(np.conj(z))
    assert e3 == pytest.approx(e, abs=1e-10)
    assert s3 == pytest.approx((-s) % math.pi, abs=1e-10)


def test_peak_flat_spectrum():
    with pytest.raises(DataError, match="no dominant"):
        peak_estimates(np.r_[1.0, np.zeros(63)])


def test_ellipse_intervals(ref_process):
    p, c = ref_process
    r = fit(simulate_wlcar1(p, c, 4096, 12), "exact")
    de, dp = ellipse_intervals(r)
    assert 0 < de < 0.2 and 0 < dp < 0.5
    de90, _ = ellipse_intervals(r, 0.9)
    assert de90 < de
