"""Frequency-weighted ride-comfort metrics.

Implements the band-pass weighting filters for motion sickness, horizontal and
vertical comfort, the windowed motion sickness dose value (MSDV), the combined
vomit rate, and threshold-based acceleration peak counting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .telemetry import SAMPLE_RATE_HZ, DriveRecord, Window

PEAK_THRESHOLD = 1.75  # m/s^2

# (low corner, high corner) in Hz for each weighting filter kind.
FILTER_CORNERS = {
    "motion_sickness": (0.02, 0.3),
    "horizontal": (0.4, 2.0),
    "vertical": (0.4, 12.5),
}


class ComfortError(Exception):
    pass


@dataclass
class WeightingFilter:
    """Causal band-pass weighting filter realized as cascaded biquads."""

    kind: str
    low_corner: float
    high_corner: float
    sos: np.ndarray
    sample_rate: float = SAMPLE_RATE_HZ


def design_filter(kind: str, low_corner: float | None = None,
                  high_corner: float | None = None,
                  sample_rate: float = SAMPLE_RATE_HZ) -> WeightingFilter:
    """Second-order Butterworth high-pass cascaded with second-order low-pass.

    Both sections come from the bilinear transform of continuous prototypes,
    so the magnitude at each corner is 1/sqrt(2) of the section passband and
    the DC gain is exactly 0.
    """
    if kind not in FILTER_CORNERS:
        raise ComfortError(f"unknown filter kind: {kind!r}")
    default_lo, default_hi = FILTER_CORNERS[kind]
    lo = default_lo if low_corner is None else low_corner
    hi = default_hi if high_corner is None else high_corner
    nyq = sample_rate / 2.0
    if not (0.0 < lo < hi < nyq):
        raise ComfortError(f"invalid corners ({lo}, {hi}) Hz at {sample_rate} Hz")
    hp = signal.butter(2, lo, btype="highpass", fs=sample_rate, output="sos")
    lp = signal.butter(2, hi, btype="lowpass", fs=sample_rate, output="sos")
    return WeightingFilter(kind=kind, low_corner=lo, high_corner=hi,
                           sos=np.vstack([hp, lp]), sample_rate=sample_rate)


def apply_filter(filt: WeightingFilter, x: np.ndarray) -> np.ndarray:
    """Causal forward-only filtering; same length as the input."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ComfortError("cannot filter an empty signal")
    return signal.sosfilt(filt.sos, x)


def weighted_rms(values: np.ndarray) -> float:
    """RMS over a window of already-weighted samples."""
    values = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(values**2)))


def msdv(filtered_axis: np.ndarray, windows: list[Window]) -> np.ndarray:
    """Per-window MSDV: the windowed RMS of the motion-sickness-filtered axis."""
    return np.array([weighted_rms(w.slice_of(filtered_axis)) for w in windows])


def vomit_rate(msdv_x, msdv_y):
    """Combined longitudinal/lateral motion-sickness measure.

    VR = sqrt((1/3)^2 MSDV_x^2 + (sqrt(2)/3)^2 MSDV_y^2)
    """
    msdv_x = np.asarray(msdv_x, dtype=float)
    msdv_y = np.asarray(msdv_y, dtype=float)
    out = np.sqrt((1.0 / 9.0) * msdv_x**2 + (2.0 / 9.0) * msdv_y**2)
    return float(out) if out.ndim == 0 else out


def count_peaks(window_signal: np.ndarray, threshold: float = PEAK_THRESHOLD) -> int:
    """Number of exceedance events: maximal runs of samples above threshold."""
    above = np.asarray(window_signal, dtype=float) > threshold
    if not above.any():
        return 0
    rising = np.count_nonzero(above[1:] & ~above[:-1])
    return int(rising + (1 if above[0] else 0))


@dataclass
class WindowMetrics:
    """Comfort and fuel figures for one analysis window."""

    driver_id: str
    window_start: int
    msdv_x: float
    msdv_y: float
    vr: float
    n_x_pos: int
    n_x_neg: int
    n_y: int
    fuel: float


def window_metrics(record: DriveRecord, windows: list[Window],
                   peak_threshold: float = PEAK_THRESHOLD) -> list[WindowMetrics]:
    """Compute per-window comfort metrics and mean fuel consumption.

    The motion-sickness filter runs once over the full-length XACC/YACC
    channels; windowing happens afterwards so filter transients do not restart
    at every window.
    """
    for name in ("XACC", "YACC", "FUEL"):
        if name not in record.channels:
            raise ComfortError(f"record lacks required channel {name}")
    wf = design_filter("motion_sickness")
    xacc = record.channels["XACC"]
    yacc = record.channels["YACC"]
    x_filt = apply_filter(wf, xacc)
    y_filt = apply_filter(wf, yacc)

    out = []
    for w in windows:
        mx = weighted_rms(w.slice_of(x_filt))
        my = weighted_rms(w.slice_of(y_filt))
        raw_x = w.channel("XACC")
        raw_y = w.channel("YACC")
        out.append(WindowMetrics(
            driver_id=record.driver_id,
            window_start=w.start,
            msdv_x=mx,
            msdv_y=my,
            vr=vomit_rate(mx, my),
            n_x_pos=count_peaks(np.maximum(raw_x, 0.0), peak_threshold),
            n_x_neg=count_peaks(np.maximum(-raw_x, 0.0), peak_threshold),
            n_y=count_peaks(np.abs(raw_y), peak_threshold),
            fuel=float(np.mean(w.channel("FUEL"))),
        ))
    return out


METRICS_CSV_COLUMNS = ("driver_id", "window_start", "msdv_x", "msdv_y", "vr",
                       "n_x_pos", "n_x_neg", "n_y", "fuel")


def write_metrics_csv(metrics: list[WindowMetrics], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_CSV_COLUMNS)
        for m in metrics:
            writer.writerow([getattr(m, c) for c in METRICS_CSV_COLUMNS])
