"""Discrete S-transform and the nine-feature reduction of a waveform.

The S-transform is computed row by row from the 1/N-normalized DFT with a
frequency-domain Gaussian exp(-2 pi^2 k^2 / n^2) (the window is wrapped
circularly, so negative lags contribute too). Row n = 0 holds the signal
mean in every column.

Features:
  F1/F2/F3  fraction of time where the fundamental per-unit amplitude is
            > 1.02 / < 0.98 / < 0.15
  F4        sum of skewness over harmonic tracks 2-7
  F5/F6     sum of kurtosis / standard deviation over tracks 8-18
  F7/F8     same over tracks 19-30
  F9        time-averaged total harmonic distortion up to order 30

A per-unit amplitude is 2|S| on interior rows (single-sided correction),
and columns within one fundamental period of either record edge are
excluded from F1-F3 and F9.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .signals import ConfigurationError, Waveform

THD_CEILING = 30
LOW_TRACKS = (2, 7)
MID_TRACKS = (8, 18)
HIGH_TRACKS = (19, 30)


@dataclass
class SpectralMatrix:
    values: np.ndarray        # (N/2 + 1, N) complex
    row_freq_hz: np.ndarray   # (N/2 + 1,)
    sample_rate_hz: float


@dataclass(frozen=True)
class FeatureSettings:
    """Extraction knobs; allow_truncation permits harmonic orders above
    Nyquist to be dropped (the 1280 Hz legacy-rate mode) instead of erroring."""
    harmonic_ceiling: int = THD_CEILING
    edge_exclusion: bool = True
    allow_truncation: bool = False
    amplitude_floor: float = 0.15


@dataclass
class FeatureVector:
    values: np.ndarray  # (9,) float64

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (9,):
            raise ValueError("feature vector must have 9 entries")


def dft(h: Sequence[float]) -> np.ndarray:
    """Forward DFT with 1/N normalization: H[k] = (1/N) sum h[m] e^{-j2pi km/N}."""
    h = np.asarray(h)
    if h.size == 0:
        raise ValueError("empty input")
    return np.fft.fft(h) / h.size


def stransform(h: Sequence[float]) -> np.ndarray:
    """S-matrix of a real sequence: rows n = 0..N/2, columns = time samples."""
    h = np.asarray(h, dtype=float)
    n_samples = h.size
    if n_samples < 4 or n_samples % 2 != 0:
        raise ValueError("need an even length >= 4")
    spectrum = dft(h)
    doubled = np.concatenate([spectrum, spectrum])
    out = np.empty((n_samples // 2 + 1, n_samples), dtype=complex)
    out[0, :] = h.mean()
    k = np.arange(n_samples, dtype=float)
    k_wrap = k - n_samples
    for n in range(1, n_samples // 2 + 1):
        gauss = np.exp(-2.0 * np.pi ** 2 * k ** 2 / n ** 2) \
            + np.exp(-2.0 * np.pi ** 2 * k_wrap ** 2 / n ** 2)
        out[n, :] = np.fft.ifft(doubled[n:n + n_samples] * gauss) * n_samples
    return out


def spectral_matrix(w: Waveform) -> SpectralMatrix:
    values = stransform(w.samples)
    n = w.samples.size
    freqs = np.arange(n // 2 + 1) * w.spec.sample_rate_hz / n
    return SpectralMatrix(values, freqs, w.spec.sample_rate_hz)


def skewness(x: Sequence[float]) -> float:
    """(1/n) sum ((x - mu)/sigma)^3, population sigma; 0 when sigma = 0."""
    x = np.asarray(x, dtype=float)
    mu = x.mean()
    sigma = x.std()
    if sigma == 0.0:
        return 0.0
    return float(np.mean(((x - mu) / sigma) ** 3))


def kurtosis(x: Sequence[float]) -> float:
    """(1/n) sum ((x - mu)/sigma)^4 without excess subtraction; 0 when sigma = 0."""
    x = np.asarray(x, dtype=float)
    mu = x.mean()
    sigma = x.std()
    if sigma == 0.0:
        return 0.0
    return float(np.mean(((x - mu) / sigma) ** 4))


def stddev(x: Sequence[float]) -> float:
    """Sample standard deviation, sqrt(sum (x - mu)^2 / (n - 1)); 0 when n = 1."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return 0.0
    return float(x.std(ddof=1))


def _harmonic_row(h: int, fundamental_hz: float, n_samples: int,
                  sample_rate_hz: float) -> int:
    """Row index whose frequency is nearest h times the fundamental."""
    return int(round(h * fundamental_hz * n_samples / sample_rate_hz))


def harmonic_track(sm: SpectralMatrix, h: int, fundamental_hz: float) -> np.ndarray:
    """Per-unit amplitude time series of harmonic order h (single-sided)."""
    n_samples = sm.values.shape[1]
    row = _harmonic_row(h, fundamental_hz, n_samples, sm.sample_rate_hz)
    if row > n_samples // 2:
        raise ValueError(f"harmonic {h} above Nyquist")
    scale = 2.0 if 0 < row < n_samples // 2 else 1.0
    return scale * np.abs(sm.values[row, :])


def extract_features(w: Waveform,
                     settings: FeatureSettings = FeatureSettings()) -> FeatureVector:
    """Reduce one waveform to its nine-feature vector."""
    spec = w.spec
    n = w.samples.size
    sm = spectral_matrix(w)
    max_h = int(np.floor((spec.sample_rate_hz / 2.0) / spec.fundamental_hz))
    if settings.harmonic_ceiling > max_h and not settings.allow_truncation:
        raise ConfigurationError(
            f"harmonic ceiling {settings.harmonic_ceiling} exceeds order {max_h} "
            f"resolvable at {spec.sample_rate_hz} Hz; enable truncation or raise the rate")
    ceiling = min(settings.harmonic_ceiling, max_h)

    fund = harmonic_track(sm, 1, spec.fundamental_hz)
    if settings.edge_exclusion:
        guard = int(round(spec.sample_rate_hz / spec.fundamental_hz))
        interior = slice(guard, n - guard)
    else:
        interior = slice(0, n)
    fund_in = fund[interior]

    f1 = float(np.mean(fund_in > 1.02))
    f2 = float(np.mean(fund_in < 0.98))
    f3 = float(np.mean(fund_in < 0.15))

    tracks = {h: harmonic_track(sm, h, spec.fundamental_hz)
              for h in range(2, ceiling + 1)}

    def track_sum(stat, lo: int, hi: int) -> float:
        return float(sum(stat(tracks[h]) for h in range(lo, min(hi, ceiling) + 1)))

    f4 = track_sum(skewness, *LOW_TRACKS)
    f5 = track_sum(kurtosis, *MID_TRACKS)
    f6 = track_sum(stddev, *MID_TRACKS)
    f7 = track_sum(kurtosis, *HIGH_TRACKS)
    f8 = track_sum(stddev, *HIGH_TRACKS)

    if tracks:
        harm = np.vstack([tracks[h][interior] for h in tracks])
        rms = np.sqrt(np.sum(harm ** 2, axis=0))
        keep = fund_in >= settings.amplitude_floor
        f9 = float(np.mean(rms[keep] / fund_in[keep])) if keep.any() else 0.0
    else:
        f9 = 0.0
    return FeatureVector(np.array([f1, f2, f3, f4, f5, f6, f7, f8, f9]))


def extract_many(waveforms: Sequence[Waveform],
                 settings: FeatureSettings = FeatureSettings()) -> np.ndarray:
    """Feature matrix, one row per waveform. Row failures name their index."""
    rows = []
    for i, w in enumerate(waveforms):
        try:
            rows.append(extract_features(w, settings).values)
        except Exception as exc:
            raise RuntimeError(f"feature extraction failed on row {i}: {exc}") from exc
    return np.vstack(rows)


def write_features(path: Path, features: np.ndarray, labels: Sequence[int],
                   settings: FeatureSettings, sample_rate_hz: float) -> None:
    """CSV `label,f1..f9` plus a companion JSON with the extraction settings."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(1, 10)) + "\n")
        for label, row in zip(labels, features):
            fh.write(str(int(label)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
    tmp.rename(path)
    meta = dict(asdict(settings), sample_rate_hz=sample_rate_hz)
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2)


def read_features(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """Load (features, labels) from a feature CSV."""
    path = Path(path)
    labels: List[int] = []
    rows: List[List[float]] = []
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("label,f1"):
            raise ValueError(f"{path}: unexpected feature header")
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != 10:
                raise ValueError(f"{path}:{lineno}: expected 10 columns")
            labels.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return np.array(rows), np.array(labels, dtype=int)
