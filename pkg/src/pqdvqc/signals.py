"""Synthetic power-quality disturbance waveforms.

Eleven closed-form disturbance models (normal, harmonic, sag, swell,
interruption, flicker, oscillatory transient, impulsive transient and the
three sag/swell/interruption + harmonic composites) with parameters drawn
uniformly from their documented ranges, plus additive white Gaussian
noise at a target SNR.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np


class ConfigurationError(Exception):
    """Invalid generation settings."""


class DisturbanceClass(IntEnum):
    D0_NORMAL = 0
    D1_HARMONIC = 1
    D2_SAG = 2
    D3_SWELL = 3
    D4_INTERRUPTION = 4
    D5_FLICKER = 5
    D6_OSC_TRANSIENT = 6
    D7_IMP_TRANSIENT = 7
    D8_SAG_HARMONIC = 8
    D9_SWELL_HARMONIC = 9
    D10_INTERRUPTION_HARMONIC = 10


@dataclass(frozen=True)
class SignalSpec:
    """Sampling grid for synthesized waveforms.

    The 3200 Hz default keeps harmonic orders up to 30 (1500 Hz) below
    Nyquist; pass 1280 Hz to reproduce the narrower published setup.
    """
    sample_rate_hz: float = 3200.0
    fundamental_hz: float = 50.0
    duration_s: float = 0.2
    rng_seed: int = 0

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or self.duration_s <= 0 or self.fundamental_hz <= 0:
            raise ConfigurationError("rates and duration must be positive")
        if self.sample_rate_hz <= 2 * self.fundamental_hz:
            raise ConfigurationError("sample rate must exceed twice the fundamental")
        if self.n_samples < 1:
            raise ConfigurationError("empty sampling grid")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.duration_s))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate_hz


@dataclass
class Waveform:
    samples: np.ndarray
    spec: SignalSpec
    label: DisturbanceClass
    params: Dict[str, float] = field(default_factory=dict)


# Parameter ranges, per disturbance model
ALPHA_SAG = (0.1, 0.9)
ALPHA_SWELL = (0.1, 0.9)
ALPHA_INTERRUPTION = (0.9, 1.0)
ALPHA_HARMONIC = (0.0, 0.15)
ALPHA_FLICKER = (0.3, 0.5)
BETA_FLICKER = (0.1, 0.4)
ALPHA_OSC = (0.1, 0.8)
ALPHA_IMPULSE = (1.0, 10.0)
TAU_RANGE = (0.008, 0.04)
EVENT_PERIODS = (4.0, 9.0)        # sag/swell/interruption window, in fundamental periods
TRANSIENT_PERIODS = (0.05, 3.0)   # transient window, in fundamental periods
OSC_FREQ_HZ = (300.0, 900.0)


def _step(t: np.ndarray, a: float) -> np.ndarray:
    """Unit step u(t - a), closed on the left: u(0) = 1."""
    return (t >= a).astype(float)


def _draw_harmonics(rng: np.random.Generator, params: Dict[str, float]) -> None:
    for h in (3, 5, 7):
        params[f"alpha{h}"] = rng.uniform(*ALPHA_HARMONIC)
        params[f"phi{h}"] = rng.uniform(0.0, 2.0 * math.pi)


def _draw_window(rng: np.random.Generator, spec: SignalSpec, periods: tuple,
                 keys: tuple, params: Dict[str, float]) -> None:
    period = 1.0 / spec.fundamental_hz
    lo, hi = periods[0] * period, periods[1] * period
    if lo > spec.duration_s:
        raise ConfigurationError("record too short for the event window")
    d = rng.uniform(lo, min(hi, spec.duration_s))
    start = rng.uniform(0.0, spec.duration_s - d)
    params[keys[0]] = start
    params[keys[1]] = start + d


def draw_params(cls: DisturbanceClass, spec: SignalSpec,
                rng: np.random.Generator) -> Dict[str, float]:
    """Sample the free model parameters for one waveform."""
    p: Dict[str, float] = {}
    if cls in (DisturbanceClass.D1_HARMONIC, DisturbanceClass.D8_SAG_HARMONIC,
               DisturbanceClass.D9_SWELL_HARMONIC,
               DisturbanceClass.D10_INTERRUPTION_HARMONIC):
        _draw_harmonics(rng, p)
    if cls in (DisturbanceClass.D2_SAG, DisturbanceClass.D8_SAG_HARMONIC):
        p["alpha"] = rng.uniform(*ALPHA_SAG)
    elif cls in (DisturbanceClass.D3_SWELL, DisturbanceClass.D9_SWELL_HARMONIC):
        p["alpha"] = rng.uniform(*ALPHA_SWELL)
    elif cls in (DisturbanceClass.D4_INTERRUPTION,
                 DisturbanceClass.D10_INTERRUPTION_HARMONIC):
        p["alpha"] = rng.uniform(*ALPHA_INTERRUPTION)
    if cls in (DisturbanceClass.D2_SAG, DisturbanceClass.D3_SWELL,
               DisturbanceClass.D4_INTERRUPTION, DisturbanceClass.D8_SAG_HARMONIC,
               DisturbanceClass.D9_SWELL_HARMONIC,
               DisturbanceClass.D10_INTERRUPTION_HARMONIC):
        _draw_window(rng, spec, EVENT_PERIODS, ("t1", "t2"), p)
    if cls == DisturbanceClass.D5_FLICKER:
        p["alpha_f"] = rng.uniform(*ALPHA_FLICKER)
        p["beta"] = rng.uniform(*BETA_FLICKER)
    if cls in (DisturbanceClass.D6_OSC_TRANSIENT, DisturbanceClass.D7_IMP_TRANSIENT):
        p["alpha"] = rng.uniform(*(ALPHA_OSC if cls == DisturbanceClass.D6_OSC_TRANSIENT
                                   else ALPHA_IMPULSE))
        p["tau"] = rng.uniform(*TAU_RANGE)
        _draw_window(rng, spec, TRANSIENT_PERIODS, ("t3", "t4"), p)
        if cls == DisturbanceClass.D6_OSC_TRANSIENT:
            nyquist = spec.sample_rate_hz / 2.0
            fn = rng.uniform(*OSC_FREQ_HZ)
            while fn >= nyquist:  # redraw instead of aliasing
                fn = rng.uniform(*OSC_FREQ_HZ)
            p["f_n"] = fn
    return p


def _evaluate(cls: DisturbanceClass, spec: SignalSpec, p: Dict[str, float]) -> np.ndarray:
    t = spec.times
    omega = 2.0 * math.pi * spec.fundamental_hz
    base = np.sin(omega * t)

    def harmonics() -> np.ndarray:
        out = np.zeros_like(t)
        for h in (3, 5, 7):
            out += p[f"alpha{h}"] * np.sin(h * omega * t + p[f"phi{h}"])
        return out

    def window(a: str, b: str) -> np.ndarray:
        return _step(t, p[a]) - _step(t, p[b])

    if cls == DisturbanceClass.D0_NORMAL:
        return base
    if cls == DisturbanceClass.D1_HARMONIC:
        return base + harmonics()
    if cls in (DisturbanceClass.D2_SAG, DisturbanceClass.D4_INTERRUPTION):
        return (1.0 - p["alpha"] * window("t1", "t2")) * base
    if cls == DisturbanceClass.D3_SWELL:
        return (1.0 + p["alpha"] * window("t1", "t2")) * base
    if cls == DisturbanceClass.D5_FLICKER:
        return (1.0 + p["alpha_f"] * np.sin(p["beta"] * omega * t)) * base
    if cls == DisturbanceClass.D6_OSC_TRANSIENT:
        burst = p["alpha"] * np.exp(-(t - p["t3"]) / p["tau"]) \
            * np.sin(2.0 * math.pi * p["f_n"] * (t - p["t3"])) * window("t3", "t4")
        return base + burst
    if cls == DisturbanceClass.D7_IMP_TRANSIENT:
        burst = p["alpha"] * np.exp(-(t - p["t3"]) / p["tau"]) * window("t3", "t4")
        return base + burst
    if cls == DisturbanceClass.D8_SAG_HARMONIC:
        return (1.0 - p["alpha"] * window("t1", "t2")) * base + harmonics()
    if cls == DisturbanceClass.D9_SWELL_HARMONIC:
        return (1.0 + p["alpha"] * window("t1", "t2")) * base + harmonics()
    if cls == DisturbanceClass.D10_INTERRUPTION_HARMONIC:
        return (1.0 - p["alpha"] * window("t1", "t2")) * base + harmonics()
    raise ConfigurationError(f"unknown class {cls}")


def synthesize(cls: DisturbanceClass, spec: SignalSpec,
               rng: np.random.Generator) -> Waveform:
    """Draw model parameters and evaluate the waveform on spec's grid."""
    params = draw_params(cls, spec, rng)
    return Waveform(_evaluate(cls, spec, params), spec, cls, params)


def add_awgn(w: Waveform, snr_db: Optional[float],
             rng: np.random.Generator) -> Waveform:
    """Add zero-mean Gaussian noise at the given SNR (powers are mean squares).

    snr_db=None means no noise. A zero-power input is returned unchanged,
    since no finite noise scale realizes a finite SNR against it.
    """
    if snr_db is None:
        return Waveform(w.samples.copy(), w.spec, w.label, dict(w.params))
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or None")
    signal_power = float(np.mean(w.samples ** 2))
    if signal_power == 0.0:
        return Waveform(w.samples.copy(), w.spec, w.label, dict(w.params))
    noise_power = signal_power / (10.0 ** (snr_db / 10.0))
    noise = rng.normal(0.0, math.sqrt(noise_power), size=w.samples.shape)
    return Waveform(w.samples + noise, w.spec, w.label, dict(w.params))


def generate_dataset(classes: Sequence[DisturbanceClass], per_class: int,
                     spec: SignalSpec, snr_db: Optional[float] = None) -> List[Waveform]:
    """per_class independent draws of every class, seeded by spec.rng_seed.

    Each waveform owns a seed-derived random stream indexed by its position,
    so regeneration is reproducible and generation may be parallelized.
    """
    if not classes:
        raise ConfigurationError("empty class set")
    if per_class < 1:
        raise ConfigurationError("per_class must be >= 1")
    classes = sorted(set(classes))
    streams = np.random.SeedSequence(spec.rng_seed).spawn(len(classes) * per_class)
    out: List[Waveform] = []
    for ci, cls in enumerate(classes):
        for k in range(per_class):
            rng = np.random.default_rng(streams[ci * per_class + k])
            w = synthesize(cls, spec, rng)
            if snr_db is not None:
                w = add_awgn(w, snr_db, rng)
            out.append(w)
    return out


def write_dataset(path: Path, waveforms: Sequence[Waveform], spec: SignalSpec,
                  labels: Optional[Sequence[int]] = None) -> None:
    """CSV with header label,param_json,s0..s{N-1} plus a sidecar spec JSON.

    `labels` overrides the waveform class codes (used by the binary
    detection experiment, which relabels disturbances as 1).
    """
    path = Path(path)
    n = spec.n_samples
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "param_json"] + [f"s{i}" for i in range(n)])
        for i, w in enumerate(waveforms):
            label = labels[i] if labels is not None else int(w.label)
            row = [label, json.dumps({"class": int(w.label), **w.params}, sort_keys=True)]
            row.extend(repr(float(v)) for v in w.samples)
            writer.writerow(row)
    tmp.rename(path)
    sidecar = {
        "sample_rate_hz": spec.sample_rate_hz,
        "fundamental_hz": spec.fundamental_hz,
        "duration_s": spec.duration_s,
        "rng_seed": spec.rng_seed,
        "n_waveforms": len(waveforms),
    }
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2)


def read_dataset(path: Path) -> tuple:
    """Load (waveforms, labels, spec) from a dataset CSV + sidecar JSON."""
    path = Path(path)
    with open(path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    spec = SignalSpec(meta["sample_rate_hz"], meta["fundamental_hz"],
                      meta["duration_s"], meta["rng_seed"])
    waveforms: List[Waveform] = []
    labels: List[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["label", "param_json"]:
            raise ValueError(f"{path}: unexpected dataset header")
        for lineno, row in enumerate(reader, start=2):
            try:
                label = int(row[0])
                params = json.loads(row[1])
                samples = np.array([float(v) for v in row[2:]])
            except (ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row: {exc}") from exc
            cls = DisturbanceClass(params.pop("class", label)) if "class" in params \
                else DisturbanceClass(label)
            waveforms.append(Waveform(samples, spec, cls, params))
            labels.append(label)
    return waveforms, labels, spec
