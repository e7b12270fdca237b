"""Weighting filters, MSDV, vomit rate and peak counting."""

import numpy as np
import pytest

from ecoride import comfort, telemetry
from ecoride.comfort import ComfortError

from conftest import make_record

FS = telemetry.SAMPLE_RATE_HZ


def steady_gain(filt, freq, seconds=120.0):
    """Amplitude gain at one frequency after transients settle."""
    t = np.arange(int(seconds * FS)) / FS
    y = comfort.apply_filter(filt, np.sin(2 * np.pi * freq * t))
    tail = y[len(y) // 2:]
    return float(np.max(np.abs(tail)))


class TestDesignFilter:
    def test_default_corners(self):
        for kind, (lo, hi) in comfort.FILTER_CORNERS.items():
            f = comfort.design_filter(kind)
            assert (f.low_corner, f.high_corner) == (lo, hi)

    def test_unknown_kind(self):
        with pytest.raises(ComfortError, match="unknown"):
            comfort.design_filter("banana")

    def test_invalid_corners(self):
        with pytest.raises(ComfortError, match="invalid"):
            comfort.design_filter("horizontal", low_corner=5.0, high_corner=1.0)
        with pytest.raises(ComfortError, match="invalid"):
            comfort.design_filter("vertical", high_corner=20.0)  # above Nyquist

    def test_dc_gain_zero(self):
        f = comfort.design_filter("motion_sickness")
        y = comfort.apply_filter(f, np.ones(10_000))
        assert abs(y[-1]) < 1e-3

    def test_passband_and_stopband(self):
        f = comfort.design_filter("horizontal")  # 0.4 - 2.0 Hz
        mid = steady_gain(f, np.sqrt(0.4 * 2.0))
        assert mid == pytest.approx(1.0, abs=0.05)
        assert steady_gain(f, 0.04) < 0.05
        assert steady_gain(f, 10.0) < 0.05

    def test_corner_gain(self):
        f = comfort.design_filter("horizontal")
        for corner in (0.4, 2.0):
            g = steady_gain(f, corner)
            assert abs(g - 0.707) < 0.1 * 0.707 + 0.05


class TestApplyFilter:
    def test_empty_input(self):
        f = comfort.design_filter("vertical")
        with pytest.raises(ComfortError, match="empty"):
            comfort.apply_filter(f, np.array([]))

    def test_causal_same_length(self):
        f = comfort.design_filter("vertical")
        x = np.random.default_rng(0).standard_normal(500)
        assert len(comfort.apply_filter(f, x)) == 500
        # causality: output up to sample k only depends on input up to k
        y_full = comfort.apply_filter(f, x)
        y_head = comfort.apply_filter(f, x[:300])
        np.testing.assert_allclose(y_full[:300], y_head, atol=1e-12)


class TestVomitRate:
    def test_axis_coefficients(self):
        assert comfort.vomit_rate(3.0, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert comfort.vomit_rate(0.0, 3.0) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_homogeneity(self):
        rng = np.random.default_rng(1)
        mx, my = rng.uniform(0, 5, 50), rng.uniform(0, 5, 50)
        np.testing.assert_allclose(comfort.vomit_rate(7.0 * mx, 7.0 * my),
                                   7.0 * comfort.vomit_rate(mx, my), rtol=1e-12)

    def test_vectorized(self):
        out = comfort.vomit_rate([3.0, 0.0], [0.0, 3.0])
        np.testing.assert_allclose(out, [1.0, np.sqrt(2)])


class TestCountPeaks:
    def test_no_peaks(self):
        assert comfort.count_peaks(np.zeros(100)) == 0

    def test_distinct_runs(self):
        x = np.zeros(100)
        x[10:15] = 2.0
        x[50:52] = 3.0
        assert comfort.count_peaks(x) == 2

    def test_run_at_start(self):
        x = np.zeros(50)
        x[0:5] = 2.0
        assert comfort.count_peaks(x) == 1

    def test_threshold_strict(self):
        assert comfort.count_peaks(np.full(10, 1.75)) == 0
        assert comfort.count_peaks(np.full(10, 1.76)) == 1

    def test_custom_threshold(self):
        x = np.array([0.0, 1.0, 0.0])
        assert comfort.count_peaks(x, threshold=0.5) == 1
        assert comfort.count_peaks(x, threshold=1.5) == 0


class TestWindowMetrics:
    def test_fields_and_counts(self, record):
        ws = telemetry.split_windows(record)
        metrics = comfort.window_metrics(record, ws)
        assert len(metrics) == len(ws)
        for m, w in zip(metrics, ws):
            assert m.driver_id == "d0"
            assert m.window_start == w.start
            assert m.msdv_x >= 0 and m.msdv_y >= 0
            assert m.vr == pytest.approx(comfort.vomit_rate(m.msdv_x, m.msdv_y))

    def test_peak_counts_pick_up_events(self):
        rec = make_record(n=256)
        rec.channels["XACC"][:] = 0.0
        rec.channels["XACC"][100:105] = -3.0   # one braking peak
        rec.channels["YACC"][:] = 0.0
        ws = telemetry.split_windows(rec)
        m = comfort.window_metrics(rec, ws)[0]
        assert (m.n_x_pos, m.n_x_neg, m.n_y) == (0, 1, 0)

    def test_fuel_is_window_mean(self, record):
        ws = telemetry.split_windows(record)
        m = comfort.window_metrics(record, ws)[0]
        assert m.fuel == pytest.approx(float(np.mean(ws[0].channel("FUEL"))))

    def test_missing_channel(self, record):
        del record.channels["FUEL"]
        with pytest.raises(ComfortError, match="FUEL"):
            comfort.window_metrics(record, telemetry.split_windows(record))

    def test_filter_runs_over_full_record(self):
        # windowing after filtering: metrics of the second window must differ
        # from filtering the window in isolation (transient would restart)
        rec = make_record(n=512, seed=3)
        ws = telemetry.split_windows(rec)
        metrics = comfort.window_metrics(rec, ws)
        wf = comfort.design_filter("motion_sickness")
        isolated = comfort.weighted_rms(
            comfort.apply_filter(wf, ws[1].channel("XACC")))
        assert metrics[1].msdv_x != pytest.approx(isolated, rel=1e-6)
