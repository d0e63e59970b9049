"""Hourly load/weather dataset handling.

Covers CSV ingestion and writing, synthetic dataset generation, chronological
train/validation/test splitting, and supervised feature assembly (lagged
loads, weather covariates, cyclic calendar features).
"""

import csv
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

CSV_HEADER = ["timestamp", "load", "temperature", "humidity", "ghi", "wind_speed"]
_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:00:00$")

HOUR = np.timedelta64(1, "h")

# Fraction of hours covered by the weekday working-hours plateau (10 h x 5 d).
_PEAK_MEAN = (10.0 / 24.0) * (5.0 / 7.0)
_GHI_REF = 150.0
_TEMP_REF = 18.0
_WIND_REF = 4.2


# ---------------------------------------------------------------------------
# Dataset


@dataclass
class Dataset:
    """Gap-free hourly series of load and weather observations."""

    timestamps: np.ndarray  # datetime64[s], strictly increasing, hourly
    load: np.ndarray        # kW, > 0
    temperature: np.ndarray  # degC
    humidity: np.ndarray     # %
    ghi: np.ndarray          # W/m^2
    wind_speed: np.ndarray   # m/s

    def __post_init__(self):
        n = len(self.timestamps)
        for name in ("load", "temperature", "humidity", "ghi", "wind_speed"):
            if len(getattr(self, name)) != n:
                raise DataError(f"column '{name}' length != timestamp length")
        if n >= 2:
            deltas = np.diff(self.timestamps)
            if not np.all(deltas == HOUR):
                bad = int(np.flatnonzero(deltas != HOUR)[0])
                raise DataError(
                    f"timestamps not gap-free hourly at index {bad} "
                    f"({self.timestamps[bad]} -> {self.timestamps[bad + 1]})"
                )
        if np.any(self.load <= 0):
            bad = int(np.flatnonzero(self.load <= 0)[0])
            raise DataError(f"non-positive load at {self.timestamps[bad]}")

    def __len__(self) -> int:
        return len(self.timestamps)


def _parse_timestamp(text: str, line_no: int) -> np.datetime64:
    if not _TS_RE.match(text):
        raise DataError(
            f"line {line_no}: timestamp '{text}' not in YYYY-MM-DDTHH:00:00 form"
        )
    try:
        return np.datetime64(text, "s")
    except ValueError as exc:
        raise DataError(f"line {line_no}: unparseable timestamp '{text}'") from exc


def load_dataset(path, max_gap_hours: int = 3) -> Dataset:
    """Read a dataset CSV, sort it, and impute or reject gaps.

    Runs of up to ``max_gap_hours`` consecutive missing hours are linearly
    interpolated (logged); longer runs raise :class:`DataError`.  Duplicate
    timestamps, non-positive loads and malformed rows are errors that name
    the offending line.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise DataError(
                f"{path}: bad header {header!r}, expected {','.join(CSV_HEADER)}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(CSV_HEADER):
                raise DataError(
                    f"line {line_no}: expected {len(CSV_HEADER)} fields, got {len(row)}"
                )
            ts = _parse_timestamp(row[0].strip(), line_no)
            try:
                vals = [float(v) for v in row[1:]]
            except ValueError:
                raise DataError(f"line {line_no}: non-numeric value in {row[1:]!r}") from None
            if not all(np.isfinite(vals)):
                raise DataError(f"line {line_no}: non-finite value in {row[1:]!r}")
            if vals[0] <= 0:
                raise DataError(f"line {line_no}: non-positive load {vals[0]}")
            rows.append((ts, line_no, vals))

    if not rows:
        raise DataError(f"{path}: no data rows")

    rows.sort(key=lambda r: r[0])
    for (ts_a, _, _), (ts_b, line_b, _) in zip(rows, rows[1:]):
        if ts_a == ts_b:
            raise DataError(f"line {line_b}: duplicate timestamp {ts_b}")

    ts = np.array([r[0] for r in rows], dtype="datetime64[s]")
    values = np.array([r[2] for r in rows], dtype=np.float64)

    gaps = (np.diff(ts) / HOUR).astype(np.int64) - 1
    if np.any(gaps > max_gap_hours):
        bad = int(np.flatnonzero(gaps > max_gap_hours)[0])
        raise DataError(
            f"gap of {int(gaps[bad])} missing hours after {ts[bad]} exceeds "
            f"imputation limit of {max_gap_hours}"
        )
    n_missing = int(gaps.sum())
    if n_missing > 0:
        full_ts = np.arange(ts[0], ts[-1] + HOUR, HOUR).astype("datetime64[s]")
        pos = ((ts - ts[0]) / HOUR).astype(np.int64)
        full = np.empty((len(full_ts), values.shape[1]))
        x_all = np.arange(len(full_ts), dtype=np.float64)
        for c in range(values.shape[1]):
            full[:, c] = np.interp(x_all, pos.astype(np.float64), values[:, c])
        log.warning("imputed %d missing hours (linear interpolation)", n_missing)
        ts, values = full_ts, full

    ds = Dataset(ts, values[:, 0], values[:, 1], values[:, 2], values[:, 3], values[:, 4])
    log.info("loaded %d observations, %s .. %s", len(ds), ts[0], ts[-1])
    return ds


def write_dataset(path, dataset: Dataset) -> None:
    """Write a dataset to CSV in the documented schema."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(dataset)):
            writer.writerow([
                np.datetime_as_string(dataset.timestamps[i], unit="s"),
                repr(float(dataset.load[i])),
                repr(float(dataset.temperature[i])),
                repr(float(dataset.humidity[i])),
                repr(float(dataset.ghi[i])),
                repr(float(dataset.wind_speed[i])),
            ])


# ---------------------------------------------------------------------------
# Splits


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test intervals, half-open [start, end)."""

    train_start: np.datetime64
    train_end: np.datetime64
    valid_start: np.datetime64
    valid_end: np.datetime64
    test_start: np.datetime64
    test_end: np.datetime64

    def __post_init__(self):
        bounds = [
            self.train_start, self.train_end, self.valid_start,
            self.valid_end, self.test_start, self.test_end,
        ]
        if self.train_start >= self.train_end:
            raise ConfigError("empty train interval")
        if self.valid_start >= self.valid_end:
            raise ConfigError("empty validation interval")
        if self.test_start >= self.test_end:
            raise ConfigError("empty test interval")
        if self.train_end > self.valid_start or self.valid_end > self.test_start:
            raise ConfigError(f"split intervals not chronological/disjoint: {bounds}")

    @classmethod
    def from_strings(cls, train_start, train_end, valid_start, valid_end,
                     test_start, test_end) -> "SplitSpec":
        vals = [np.datetime64(s, "s") for s in
                (train_start, train_end, valid_start, valid_end, test_start, test_end)]
        return cls(*vals)


def two_year_split(start="2014-01-01T00:00:00") -> SplitSpec:
    """Default protocol: 10 months train, 2 months validation, 1 year test."""
    t0 = np.datetime64(start, "s")
    year = t0.astype("datetime64[Y]").astype(int) + 1970
    return SplitSpec.from_strings(
        str(t0), f"{year}-11-01T00:00:00",
        f"{year}-11-01T00:00:00", f"{year + 1}-01-01T00:00:00",
        f"{year + 1}-01-01T00:00:00", f"{year + 2}-01-01T00:00:00",
    )


# ---------------------------------------------------------------------------
# Features


@dataclass
class Standardizer:
    """Column-wise z-scoring with a zero-variance guard."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        return cls(mean, std)

    @classmethod
    def identity(cls, n_features: int) -> "Standardizer":
        return cls(np.zeros(n_features), np.ones(n_features))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


@dataclass
class FeatureMatrix:
    """Supervised rows: raw features, targets, and the shared train scaler.

    ``X`` holds raw (unscaled) values; models consume :meth:`scaled`.
    ``timestamps`` are the target times (one hour ahead of the newest lag).
    """

    X: np.ndarray
    y: np.ndarray
    timestamps: np.ndarray
    feature_names: list[str] = field(default_factory=list)
    scaler: Standardizer | None = None

    def __post_init__(self):
        if self.X.ndim != 2 or len(self.X) != len(self.y) or len(self.y) != len(self.timestamps):
            raise DataError("inconsistent feature matrix shapes")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def scaled(self) -> np.ndarray:
        if self.scaler is None:
            return self.X
        return self.scaler.transform(self.X)


def calendar_components(timestamps: np.ndarray) -> np.ndarray:
    """Cyclic sin/cos encoding of hour-of-day, day-of-week, month-of-year."""
    days = timestamps.astype("datetime64[D]")
    hod = (timestamps.astype("datetime64[h]") - days.astype("datetime64[h]")).astype(np.int64)
    dow = (days.astype(np.int64) + 3) % 7  # 1970-01-01 was a Thursday; Monday = 0
    months = timestamps.astype("datetime64[M]")
    moy = months.astype(np.int64) % 12 + 1
    out = np.empty((len(timestamps), 6))
    out[:, 0] = np.sin(2 * np.pi * hod / 24.0)
    out[:, 1] = np.cos(2 * np.pi * hod / 24.0)
    out[:, 2] = np.sin(2 * np.pi * dow / 7.0)
    out[:, 3] = np.cos(2 * np.pi * dow / 7.0)
    out[:, 4] = np.sin(2 * np.pi * (moy - 1) / 12.0)
    out[:, 5] = np.cos(2 * np.pi * (moy - 1) / 12.0)
    return out


def build_features(dataset: Dataset, lags: int, split: SplitSpec
                   ) -> tuple[FeatureMatrix, FeatureMatrix, FeatureMatrix]:
    """Assemble lag/weather/calendar features and split them chronologically.

    Each row predicts the load one hour ahead: lags and weather are taken at
    the current hour, calendar components at the target hour.  Rows belong to
    the split containing their target timestamp, so validation and test rows
    may reach back into earlier periods for lag values while training targets
    never leave the training interval.
    """
    if lags < 1:
        raise ConfigError(f"lag count must be >= 1, got {lags}")
    n = len(dataset)
    if n <= lags + 1:
        raise DataError(f"dataset of {n} hours too short for {lags} lags")

    targets = np.arange(lags, n)
    y = dataset.load[targets]
    ts = dataset.timestamps[targets]

    lag_cols = np.empty((len(targets), lags))
    for i in range(lags):
        lag_cols[:, i] = dataset.load[targets - 1 - i]
    weather = np.column_stack([
        dataset.temperature[targets - 1],
        dataset.humidity[targets - 1],
        dataset.ghi[targets - 1],
        dataset.wind_speed[targets - 1],
    ])
    X = np.column_stack([lag_cols, weather, calendar_components(ts)])
    names = (
        [f"lag_{i + 1}" for i in range(lags)]
        + ["temperature", "humidity", "ghi", "wind_speed"]
        + ["hod_sin", "hod_cos", "dow_sin", "dow_cos", "moy_sin", "moy_cos"]
    )

    def take(start, end):
        mask = (ts >= start) & (ts < end)
        return X[mask], y[mask], ts[mask]

    parts = [take(split.train_start, split.train_end),
             take(split.valid_start, split.valid_end),
             take(split.test_start, split.test_end)]
    for part, label in zip(parts, ("train", "validation", "test")):
        if len(part[1]) == 0:
            raise DataError(f"{label} split is empty for the given dataset")

    scaler = Standardizer.fit(parts[0][0])
    return tuple(
        FeatureMatrix(Xp, yp, tp, feature_names=list(names), scaler=scaler)
        for Xp, yp, tp in parts
    )


# ---------------------------------------------------------------------------
# Synthetic data


@dataclass(frozen=True)
class RegimeSpec:
    """Scaling overrides applied to hours in [start_hour, end_hour)."""

    start_hour: int
    end_hour: int
    seasonal_scale: float = 1.0
    peak_scale: float = 1.0
    coupling_scale: float = 1.0
    noise_scale: float = 1.0
    spike_rate: float = 0.0


def alternating_regimes(n_hours: int, period_hours: int = 720
                        ) -> tuple[RegimeSpec, ...]:
    """Alternate smooth-seasonal and spiky weather-driven regimes.

    The two profiles shift which functional shape dominates the load so that
    no single forecaster wins everywhere: the spiky blocks add rare one-sided
    demand events that reward median-seeking fits on ordinary hours.
    """
    smooth = dict(seasonal_scale=1.25, peak_scale=0.25, coupling_scale=0.5,
                  noise_scale=0.7)
    spiky = dict(seasonal_scale=0.6, peak_scale=1.7, coupling_scale=1.9,
                 noise_scale=1.6, spike_rate=0.14)
    out = []
    start = 0
    k = 0
    while start < n_hours:
        end = min(start + period_hours, n_hours)
        out.append(RegimeSpec(start, end, **(smooth if k % 2 == 0 else spiky)))
        start = end
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the seeded synthetic load/weather generator."""

    seed: int = 2014
    n_hours: int = 17520
    start: str = "2014-01-01T00:00:00"
    base_load: float = 2000.0
    daily_amplitude: float = 320.0
    weekly_amplitude: float = 120.0
    annual_amplitude: float = 200.0
    peak_amplitude: float = 340.0
    temp_coeff: float = 22.0
    ghi_coeff: float = 0.25
    wind_coeff: float = -8.0
    noise_scale: float = 25.0
    spike_scale: float = 650.0
    trend_pct_per_year: float = 40.0
    regimes: tuple[RegimeSpec, ...] | None = None
    regime_period_hours: int = 720

    def __post_init__(self):
        if self.n_hours < 1:
            raise ConfigError("n_hours must be >= 1")
        for name in ("base_load", "daily_amplitude", "weekly_amplitude",
                     "annual_amplitude", "peak_amplitude", "noise_scale",
                     "spike_scale"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def regime_schedule(self) -> tuple[RegimeSpec, ...]:
        if self.regimes is not None:
            return self.regimes
        if self.regime_period_hours and self.regime_period_hours > 0:
            return alternating_regimes(self.n_hours, self.regime_period_hours)
        return ()


def _ar1(rho: float, sigma: float, shocks: np.ndarray) -> np.ndarray:
    out = np.empty_like(shocks)
    prev = 0.0
    for i in range(len(shocks)):
        prev = rho * prev + sigma * shocks[i]
        out[i] = prev
    return out


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Deterministic synthetic hourly load and weather series.

    Load combines daily/weekly/annual sinusoids, a weekday working-hours
    plateau, centered weather-coupling terms, Gaussian noise, rare positive
    demand events and a slow multiplicative growth trend; the regime
    schedule rescales components over time.  With zero noise, coupling, trend and no regimes the load
    reduces to ``base + daily_amplitude * sin(2*pi*hour_of_day/24)`` (plus
    the other sinusoids), which the tests verify pointwise.
    """
    n = config.n_hours
    rng = np.random.default_rng(config.seed)
    shocks = {name: rng.standard_normal(n)
              for name in ("temp", "humidity", "cloud", "wind", "load")}

    t0 = np.datetime64(config.start, "s")
    ts = (t0 + np.arange(n) * HOUR).astype("datetime64[s]")
    days = ts.astype("datetime64[D]")
    hod = (ts.astype("datetime64[h]") - days.astype("datetime64[h]")).astype(np.int64)
    dow = (days.astype(np.int64) + 3) % 7
    year_start = ts.astype("datetime64[Y]").astype("datetime64[s]")
    frac_year = ((ts - year_start) / HOUR).astype(np.float64) / 8760.0
    annual_phase = np.sin(2 * np.pi * (frac_year - 0.25))

    temp = (_TEMP_REF + 9.0 * annual_phase
            + 4.5 * np.sin(2 * np.pi * (hod - 9) / 24.0)
            + _ar1(0.95, 0.55, shocks["temp"]))
    humidity = np.clip(62.0 - 1.5 * (temp - _TEMP_REF)
                       + _ar1(0.9, 1.2, shocks["humidity"]), 5.0, 100.0)
    cloud = np.clip(0.78 + _ar1(0.92, 0.07, shocks["cloud"]), 0.2, 1.0)
    sun = np.maximum(0.0, np.sin(np.pi * (hod - 6) / 12.0))
    ghi = sun * (620.0 + 260.0 * annual_phase) * cloud
    wind = np.clip(_WIND_REF + _ar1(0.96, 0.4, shocks["wind"]), 0.2, None)

    seasonal = (config.daily_amplitude * np.sin(2 * np.pi * hod / 24.0)
                + config.weekly_amplitude * np.sin(2 * np.pi * (dow * 24 + hod) / 168.0)
                + config.annual_amplitude * annual_phase)
    plateau = ((hod >= 8) & (hod <= 17) & (dow < 5)).astype(np.float64)
    peak = config.peak_amplitude * (plateau - _PEAK_MEAN)
    coupling = (config.temp_coeff * (temp - _TEMP_REF)
                + config.ghi_coeff * (ghi - _GHI_REF)
                + config.wind_coeff * (wind - _WIND_REF))
    noise = config.noise_scale * shocks["load"]

    s_seasonal = np.ones(n)
    s_peak = np.ones(n)
    s_coupling = np.ones(n)
    s_noise = np.ones(n)
    s_spike = np.zeros(n)
    for regime in config.regime_schedule():
        sl = slice(max(regime.start_hour, 0), min(regime.end_hour, n))
        s_seasonal[sl] = regime.seasonal_scale
        s_peak[sl] = regime.peak_scale
        s_coupling[sl] = regime.coupling_scale
        s_noise[sl] = regime.noise_scale
        s_spike[sl] = regime.spike_rate

    # Rare one-sided demand events (large machinery, fleet charging): hours
    # drawn at the regime's spike rate get an exponential surcharge.
    events = np.where(rng.random(n) < s_spike,
                      rng.exponential(config.spike_scale or 1.0, n), 0.0)

    # Slow demand growth; year two runs above anything seen in year one,
    # which stresses models that cannot extrapolate.
    trend = 1.0 + (config.trend_pct_per_year / 100.0) * (np.arange(n) / 8760.0)
    load = trend * (config.base_load + s_seasonal * seasonal + s_peak * peak
                    + s_coupling * coupling + s_noise * noise + events)
    load = np.maximum(load, 1.0)
    return Dataset(ts, load, temp, humidity, ghi, wind)
