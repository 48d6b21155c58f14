"""Time-series value type, CSV ingestion and preprocessing operations.

A TimeSeries is immutable: every operation returns a new instance. Missing
observations are carried as NaN until an imputation step removes them;
analyses and models refuse series that still contain NaN.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import (
    AllMissing,
    DegenerateSeries,
    EmptySeries,
    HeaderMismatch,
    IoError,
    MissingValues,
    NonPositiveValue,
    SeriesTooShort,
    WindowTooLarge,
)

_DATE_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d",
    "%Y-%m",
    "%Y",
)


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601-ish timestamp; bare years are accepted for annual data."""
    text = text.strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ValueError(f"unparseable timestamp: {text!r}")


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    timestamps: tuple | None = None
    frequency: int | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if self.timestamps is not None:
            ts = tuple(self.timestamps)
            if len(ts) != len(self.values):
                raise ValueError("timestamps and values differ in length")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)
        if self.frequency is not None and self.frequency < 2:
            raise ValueError("frequency must be >= 2 when set")
        self.values.flags.writeable = False

    def __len__(self):
        return len(self.values)

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def require_complete(self):
        if self.has_missing:
            raise MissingValues(f"series {self.name!r} contains missing values")

    def replace(self, values, keep_time=True) -> "TimeSeries":
        values = np.asarray(values, dtype=float)
        ts = self.timestamps if keep_time and self.timestamps is not None and len(
            self.timestamps) == len(values) else None
        return TimeSeries(values, ts, self.frequency, self.name)


def ingest_csv(locator: str, spec) -> tuple[TimeSeries, list[str]]:
    """Read a CSV file into a TimeSeries following an input field spec.

    Returns the series plus per-row coercion warnings. The datetime field (if
    any) becomes the timestamps; the first numeric field becomes the values.
    """
    try:
        with open(locator, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if not rows:
        raise EmptySeries(f"{locator}: file is empty")

    expected = [f["name"] for f in spec.fields]
    header = [h.strip() for h in rows[0]]
    if header != expected:
        raise HeaderMismatch(expected, header)
    data_rows = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not data_rows:
        raise EmptySeries(f"{locator}: no data rows")

    dtypes = {f["name"]: f["dtype"] for f in spec.fields}
    time_col = next((i for i, n in enumerate(expected) if dtypes[n] == "datetime"), None)
    value_col = next(
        (i for i, n in enumerate(expected)
         if dtypes[n] in ("integer", "real") and i != time_col), None)
    if value_col is None:
        raise HeaderMismatch(expected, header)  # no numeric field to read

    warnings = []
    values = np.empty(len(data_rows))
    timestamps = [] if time_col is not None else None
    for i, row in enumerate(data_rows):
        cell = row[value_col].strip() if value_col < len(row) else ""
        try:
            values[i] = float(cell)
        except ValueError:
            values[i] = np.nan
            warnings.append(f"row {i + 1}: unparseable value {cell!r} -> missing")
        if timestamps is not None:
            timestamps.append(parse_instant(row[time_col]))
    return TimeSeries(values, timestamps, None, name=spec.fields[value_col]["name"]), warnings


def impute(ts: TimeSeries, method: str = "linear-interpolation") -> TimeSeries:
    """Fill missing values by the non-missing mean or linear interpolation."""
    x = ts.values
    mask = np.isnan(x)
    if mask.all():
        raise AllMissing("cannot impute a fully missing series")
    if not mask.any():
        return ts
    out = x.copy()
    if method == "mean":
        out[mask] = np.nanmean(x)
    elif method == "linear-interpolation":
        idx = np.arange(len(x))
        out[mask] = np.interp(idx[mask], idx[~mask], x[~mask])  # flat at the ends
    else:
        raise ValueError(f"unknown imputation method {method!r}")
    return ts.replace(out)


def detect_outliers(ts: TimeSeries, z_threshold: float = 3.0) -> list[int]:
    """Indices whose sample z-score magnitude exceeds the threshold."""
    ts.require_complete()
    x = ts.values
    if len(x) < 3:
        raise SeriesTooShort("outlier detection needs at least 3 points")
    sd = x.std(ddof=1)
    if sd == 0 or not np.isfinite(sd):
        raise DegenerateSeries("zero-variance series")
    z = np.abs(x - x.mean()) / sd
    return [int(i) for i in np.nonzero(z > z_threshold)[0]]


def scale(ts: TimeSeries, method: str = "zscore") -> TimeSeries:
    ts.require_complete()
    x = ts.values
    if method == "zscore":
        sd = x.std(ddof=1) if len(x) > 1 else 0.0
        if sd == 0:
            raise DegenerateSeries("zero-variance series")
        return ts.replace((x - x.mean()) / sd)
    if method == "minmax":
        lo, hi = x.min(), x.max()
        if hi == lo:
            raise DegenerateSeries("constant series")
        return ts.replace((x - lo) / (hi - lo))
    raise ValueError(f"unknown scaling method {method!r}")


def smooth_ma(ts: TimeSeries, window: int) -> TimeSeries:
    """Centered moving average; the result is shorter by window - 1."""
    ts.require_complete()
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > len(ts):
        raise WindowTooLarge(f"window {window} exceeds length {len(ts)}")
    kernel = np.full(window, 1.0 / window)
    return ts.replace(np.convolve(ts.values, kernel, mode="valid"), keep_time=False)


def difference(ts: TimeSeries, d: int = 0, seasonal_d: int = 0, period: int = 1) -> TimeSeries:
    """Apply d regular and seasonal_d seasonal (lag-period) differences."""
    ts.require_complete()
    if len(ts) <= d + seasonal_d * period:
        raise SeriesTooShort("series too short to difference")
    x = ts.values
    for _ in range(d):
        x = np.diff(x)
    for _ in range(seasonal_d):
        x = x[period:] - x[:-period]
    return ts.replace(x, keep_time=False)


def undifference(values: np.ndarray, heads: list[np.ndarray],
                 d: int, seasonal_d: int, period: int) -> np.ndarray:
    """Invert difference() given the retained leading values of each pass."""
    x = np.asarray(values, dtype=float)
    for head in reversed(heads[d:d + seasonal_d]):
        out = np.empty(len(head) + len(x))
        out[:len(head)] = head
        for i in range(len(x)):
            out[len(head) + i] = x[i] + out[i]
        x = out
    for head in reversed(heads[:d]):
        x = np.concatenate([head, head[-1] + np.cumsum(x)])
    return x


def difference_with_state(ts: TimeSeries, d: int, seasonal_d: int, period: int):
    """Difference while keeping the leading values needed to reconstruct."""
    ts.require_complete()
    if len(ts) <= d + seasonal_d * period:
        raise SeriesTooShort("series too short to difference")
    x = ts.values
    heads = []
    for _ in range(d):
        heads.append(x[:1].copy())
        x = np.diff(x)
    for _ in range(seasonal_d):
        heads.append(x[:period].copy())
        x = x[period:] - x[:-period]
    return x, heads


def transform(ts: TimeSeries, lam: float) -> TimeSeries:
    """Power transform with parameter lam; lam = 0 is the natural log."""
    ts.require_complete()
    x = ts.values
    if lam <= 0 and (x <= 0).any():
        raise NonPositiveValue("power transform with lambda <= 0 needs positive data")
    if lam == 0:
        return ts.replace(np.log(x))
    return ts.replace((np.power(x, lam) - 1.0) / lam)


def inverse_transform(values: np.ndarray, lam: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if lam == 0:
        return np.exp(values)
    return np.power(lam * values + 1.0, 1.0 / lam)


def periodogram(ts: TimeSeries) -> list[dict]:
    """Power at the Fourier frequencies k/n of the mean-removed series.

    Scaled so the total power equals (n/2) times the population variance.
    """
    ts.require_complete()
    n = len(ts)
    if n < 4:
        raise SeriesTooShort("periodogram needs at least 4 points")
    x = ts.values - ts.values.mean()
    spectrum = np.fft.rfft(x)
    out = []
    for k in range(1, n // 2 + 1):
        power = abs(spectrum[k]) ** 2 / n
        if n % 2 == 0 and k == n // 2:
            power /= 2.0  # the Nyquist bin has no conjugate twin
        out.append({"frequency": k / n, "power": float(power)})
    return out
