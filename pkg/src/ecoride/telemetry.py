"""Telemetry ingestion: CSV loading, resampling to 32 Hz, overlapping windows."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

SAMPLE_RATE_HZ = 32.0
WINDOW_LEN = 256
WINDOW_STEP = 128
SPEED_THRESHOLD_KMH = 60.0

# Channel names and their units (documentation only; values are plain floats).
CHANNELS = {
    "SWA": "deg",
    "VS": "km/h",
    "ERPM": "rev/min",
    "PGP": "%",
    "GP": "",
    "BP": "",
    "XACC": "m/s^2",
    "YACC": "m/s^2",
    "ZACC": "m/s^2",
    "FUEL": "l/100km",
}

TIME_COLUMN = "t"


class TelemetryError(Exception):
    """Raised for malformed telemetry inputs."""


@dataclass
class RawChannel:
    """One named channel as sampled in the source file, before resampling."""

    name: str
    rate: float
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.rate <= 0:
            raise TelemetryError(f"channel {self.name}: rate must be > 0")
        if self.timestamps.shape != self.values.shape:
            raise TelemetryError(f"channel {self.name}: timestamp/value length mismatch")
        if len(self.timestamps) >= 2:
            dt = np.diff(self.timestamps)
            if np.any(dt <= 0):
                bad = int(np.argmax(dt <= 0)) + 1
                raise TelemetryError(
                    f"channel {self.name}: non-monotonic timestamps at sample {bad}"
                )
            med = float(np.median(dt))
            if abs(1.0 / med - self.rate) > 0.05 * self.rate:
                raise TelemetryError(
                    f"channel {self.name}: declared rate {self.rate} Hz inconsistent "
                    f"with median spacing {med:.6g} s"
                )

    @property
    def t_start(self) -> float:
        return float(self.timestamps[0])

    @property
    def t_end(self) -> float:
        return float(self.timestamps[-1])


@dataclass
class DriveRecord:
    """Uniformly sampled 32 Hz multi-channel telemetry for one driver/trip."""

    driver_id: str
    channels: dict[str, np.ndarray]
    t_start: float = 0.0

    def __post_init__(self):
        lengths = {name: len(v) for name, v in self.channels.items()}
        if len(set(lengths.values())) > 1:
            raise TelemetryError(f"unequal channel lengths: {lengths}")
        for name in ("VS", "ERPM"):
            if name in self.channels and np.any(self.channels[name] < 0):
                raise TelemetryError(f"channel {name} has negative values")

    @property
    def n_total(self) -> int:
        if not self.channels:
            return 0
        return len(next(iter(self.channels.values())))

    def __len__(self) -> int:
        return self.n_total


@dataclass
class Window:
    """A 256-sample analysis segment of a DriveRecord."""

    record: DriveRecord = field(repr=False)
    start: int
    length: int = WINDOW_LEN

    def __post_init__(self):
        if self.start + self.length > self.record.n_total:
            raise TelemetryError(
                f"window [{self.start}, {self.start + self.length}) exceeds record "
                f"length {self.record.n_total}"
            )

    def channel(self, name: str) -> np.ndarray:
        return self.record.channels[name][self.start : self.start + self.length]

    def slice_of(self, full_signal: np.ndarray) -> np.ndarray:
        return full_signal[self.start : self.start + self.length]


def load_csv(path, schema: dict[str, str] | None = None) -> list[RawChannel]:
    """Read a telemetry CSV into RawChannels.

    ``schema`` maps channel name -> column name; by default every known channel
    maps to a column of the same name.  Rows with unparseable values are
    rejected (logged with their row index).
    """
    if schema is None:
        schema = {name: name for name in CHANNELS}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise TelemetryError(f"telemetry file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = None
        for row in reader:
            if row and any(cell.strip() for cell in row):
                header = [cell.strip() for cell in row]
                break
        if header is None:
            raise TelemetryError(f"empty telemetry file: {path}")
        if TIME_COLUMN not in header:
            raise TelemetryError(f"missing time column '{TIME_COLUMN}' in {path}")
        for chan, col in schema.items():
            if col not in header:
                raise TelemetryError(f"missing required column '{col}' (channel {chan})")
        col_idx = {name: header.index(name) for name in header}
        t_idx = col_idx[TIME_COLUMN]

        times: list[float] = []
        columns: dict[str, list[float]] = {chan: [] for chan in schema}
        for i, row in enumerate(reader, start=2):  # 1-based, after header
            if not row or not any(cell.strip() for cell in row):
                continue
            try:
                t = float(row[t_idx])
                vals = {chan: float(row[col_idx[col]]) for chan, col in schema.items()}
            except (ValueError, IndexError):
                log.warning("rejecting unparseable row %d in %s", i, path)
                continue
            times.append(t)
            for chan, v in vals.items():
                columns[chan].append(v)

    ts = np.asarray(times)
    if len(ts) >= 2:
        dt = np.diff(ts)
        if np.any(dt <= 0):
            bad = int(np.argmax(dt <= 0)) + 1
            raise TelemetryError(f"non-monotonic timestamps at data row {bad} in {path}")
        rate = 1.0 / float(np.median(dt))
    else:
        rate = SAMPLE_RATE_HZ
    return [
        RawChannel(name=chan, rate=rate, timestamps=ts, values=np.asarray(columns[chan]))
        for chan in schema
    ]


def resample(channels: list[RawChannel], driver_id: str = "") -> DriveRecord:
    """Linearly interpolate all channels onto a common 32 Hz grid.

    The grid spans the intersection of the channel time ranges, starting at the
    latest channel start.  Channels sampled above 32 Hz get a moving-average
    pre-filter over one output period before interpolation.
    """
    if not channels:
        raise TelemetryError("no channels to resample")
    for ch in channels:
        if len(ch.timestamps) < 2:
            raise TelemetryError(f"channel {ch.name}: need at least 2 samples")
    t0 = max(ch.t_start for ch in channels)
    t1 = min(ch.t_end for ch in channels)
    if t1 < t0:
        raise TelemetryError("channels have no overlapping time support")
    n = int(np.floor((t1 - t0) * SAMPLE_RATE_HZ)) + 1
    grid = t0 + np.arange(n) / SAMPLE_RATE_HZ

    out: dict[str, np.ndarray] = {}
    for ch in channels:
        values = ch.values
        if ch.rate > SAMPLE_RATE_HZ * 1.05:
            width = max(2, int(round(ch.rate / SAMPLE_RATE_HZ)))
            kernel = np.ones(width) / width
            values = np.convolve(values, kernel, mode="same")
        out[ch.name] = np.interp(grid, ch.timestamps, values)
    return DriveRecord(driver_id=driver_id, channels=out, t_start=t0)


def split_windows(record: DriveRecord) -> list[Window]:
    """256-sample windows advancing by 128 samples (50% overlap)."""
    n = record.n_total
    if n < WINDOW_LEN:
        return []
    starts = range(0, n - WINDOW_LEN + 1, WINDOW_STEP)
    return [Window(record=record, start=s) for s in starts]


def filter_by_mean_speed(windows: list[Window], threshold: float = SPEED_THRESHOLD_KMH) -> list[Window]:
    """Keep windows whose mean vehicle speed is at or above ``threshold`` km/h."""
    return [w for w in windows if float(np.mean(w.channel("VS"))) >= threshold]
