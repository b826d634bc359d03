"""Experiment presets tying the pipeline together.

detect2   binary detection: normal vs a uniform draw over the ten
          disturbance classes, 1000 waveforms per side by default.
single7   the seven single disturbance classes D1-D7.
mixed10   all ten disturbance classes D1-D10.
noise_sweep  the seven-class task trained on clean features and
          evaluated on matched test sets at descending SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .model import ModelConfig
from .signals import DisturbanceClass, SignalSpec, Waveform, add_awgn, synthesize
from .training import TrainConfig

DISTURBANCE_CLASSES = [DisturbanceClass(c) for c in range(1, 11)]
SWEEP_SNRS_DB: List[Optional[float]] = [None, 40.0, 30.0, 20.0]


@dataclass
class ExperimentSpec:
    name: str
    classes: List[DisturbanceClass]
    per_class: int
    binary: bool
    model: ModelConfig
    train: TrainConfig
    snrs_db: List[Optional[float]] = field(default_factory=list)


def experiment_spec(name: str, per_class: Optional[int] = None,
                    seed: int = 0) -> ExperimentSpec:
    if name == "detect2":
        return ExperimentSpec(
            name, [DisturbanceClass.D0_NORMAL], per_class or 1000, True,
            ModelConfig(n_data=9, n_ancilla=2, n_layers=1, seed=seed),
            TrainConfig(epochs=25, batch_size=32, lr=0.05, loss_kind="bce", seed=seed))
    if name == "single7":
        return ExperimentSpec(
            name, DISTURBANCE_CLASSES[:7], per_class or 1000, False,
            ModelConfig(n_data=9, n_ancilla=7, n_layers=2, seed=seed),
            TrainConfig(epochs=105, batch_size=16, lr=0.05, loss_kind="cce", seed=seed))
    if name == "mixed10":
        return ExperimentSpec(
            name, DISTURBANCE_CLASSES, per_class or 1000, False,
            ModelConfig(n_data=9, n_ancilla=10, n_layers=2, seed=seed),
            TrainConfig(epochs=160, batch_size=10, lr=0.05, loss_kind="cce", seed=seed))
    if name == "noise_sweep":
        spec = experiment_spec("single7", per_class, seed)
        return replace(spec, name="noise_sweep", snrs_db=list(SWEEP_SNRS_DB))
    raise ValueError(f"unknown experiment {name!r}; "
                     f"choose detect2, single7, mixed10 or noise_sweep")


def generate_experiment_waveforms(exp: ExperimentSpec, spec: SignalSpec,
                                  snr_db: Optional[float] = None
                                  ) -> Tuple[List[Waveform], List[int]]:
    """Waveforms plus training labels for one experiment.

    detect2 pairs per_class normal records (label 0) with per_class
    disturbances drawn uniformly over D1-D10 (label 1); the multi-class
    experiments label class D(k) as k-1.
    """
    root = np.random.SeedSequence(spec.rng_seed)
    if exp.binary:
        picker = np.random.default_rng(root.spawn(1)[0])
        kinds = [DisturbanceClass.D0_NORMAL] * exp.per_class + \
            [DISTURBANCE_CLASSES[i]
             for i in picker.integers(0, len(DISTURBANCE_CLASSES), exp.per_class)]
        labels = [0] * exp.per_class + [1] * exp.per_class
    else:
        kinds = [cls for cls in exp.classes for _ in range(exp.per_class)]
        labels = [int(cls) - 1 for cls in kinds]
    streams = root.spawn(1 + len(kinds))[1:]
    waveforms = []
    for kind, stream in zip(kinds, streams):
        rng = np.random.default_rng(stream)
        w = synthesize(kind, spec, rng)
        if snr_db is not None:
            w = add_awgn(w, snr_db, rng)
        waveforms.append(w)
    return waveforms, labels


def add_noise_variant(waveforms: Sequence[Waveform], snr_db: Optional[float],
                      seed: int) -> List[Waveform]:
    """Noisy copies of a base set, one independent stream per waveform."""
    if snr_db is None:
        return list(waveforms)
    streams = np.random.SeedSequence(seed).spawn(len(waveforms))
    return [add_awgn(w, snr_db, np.random.default_rng(s))
            for w, s in zip(waveforms, streams)]
