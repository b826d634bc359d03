"""Variational classifier: standardization, circuit construction, forward
pass and the softmax head.

Layout: data qubits 0..n_data-1, ancilla (readout) qubits n_data..N-1,
one ancilla per class. Encoding puts each data qubit through H then
Ry(arcsin x*); ancillas receive no encoding gates, so with all angles at
zero every ancilla reads <Z> = +1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _engine as engine
from . import qsim

CHECKPOINT_VERSION = 2
PARAM_INIT_SCALE = 0.1


@dataclass(frozen=True)
class ModelConfig:
    n_data: int = 9
    n_ancilla: int = 2
    n_layers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_data < 1 or self.n_ancilla < 1 or self.n_layers < 1:
            raise ValueError("n_data, n_ancilla and n_layers must be >= 1")
        if self.n_qubits > qsim.MAX_QUBITS:
            raise qsim.CapacityError(
                f"{self.n_qubits} qubits exceeds the {qsim.MAX_QUBITS}-qubit bound")

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_ancilla

    @property
    def n_params(self) -> int:
        return self.n_layers * (3 * self.n_qubits + self.n_data)

    @property
    def ancillas(self) -> List[int]:
        return list(range(self.n_data, self.n_qubits))


@dataclass
class StandardizationStats:
    mean: np.ndarray
    stddev: np.ndarray
    degenerate: np.ndarray  # bool per feature: constant training column

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.stddev = np.asarray(self.stddev, dtype=float)
        self.degenerate = np.asarray(self.degenerate, dtype=bool)


def fit_standardizer(train: np.ndarray) -> StandardizationStats:
    """Per-feature mean/stddev from training rows; constant columns get
    stddev 1 and a degeneracy flag."""
    train = np.asarray(train, dtype=float)
    if train.ndim != 2 or train.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    mean = train.mean(axis=0)
    stddev = train.std(axis=0)
    degenerate = stddev == 0.0
    stddev = np.where(degenerate, 1.0, stddev)
    return StandardizationStats(mean, stddev, degenerate)


def standardize(x: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    """Z-score clamped to [-1, 1]; outliers saturate rather than shrink
    the in-range spread, and the result stays inside arcsin's domain."""
    z = (np.asarray(x, dtype=float) - stats.mean) / stats.stddev
    return np.clip(z, -1.0, 1.0)


def build_encoding(x_std: Sequence[float], config: ModelConfig) -> List[qsim.GateOp]:
    """Circuit prefix: H + Ry(arcsin x*) per data qubit."""
    x_std = np.asarray(x_std, dtype=float)
    if np.any(np.abs(x_std) > 1.0):
        raise ValueError("encoding input outside [-1, 1]")
    ops: List[qsim.GateOp] = []
    for i in range(config.n_data):
        ops.append(qsim.GateOp("h", i))
        ops.append(qsim.GateOp("ry", i, theta=float(np.arcsin(x_std[i]))))
    return ops


def build_variational(config: ModelConfig) -> List[qsim.GateOp]:
    """Circuit suffix: n_layers repetitions of (rotations + ring entangler)
    then (rotations + data->ancilla entanglers), every angle trainable."""
    ops: List[qsim.GateOp] = []
    for vop in engine.build_varops(config.n_qubits, config.n_data, config.n_layers):
        if vop.kind == engine.RY:
            ops.append(qsim.GateOp("ry", vop.target, param_id=vop.param_id))
        else:
            ops.append(qsim.GateOp("cry", vop.target, control=vop.control,
                                   param_id=vop.param_id))
    return ops


def build_circuit(x_std: Sequence[float], config: ModelConfig) -> qsim.Circuit:
    return qsim.Circuit(config.n_qubits,
                        build_encoding(x_std, config) + build_variational(config))


def layer_map(config: ModelConfig) -> List[dict]:
    """Per-layer parameter index ranges, stored in checkpoints."""
    n = config.n_qubits
    out = []
    base = 0
    for layer in range(config.n_layers):
        out.append({
            "layer": layer,
            "rot_a": [base, base + n],
            "ring": [base + n, base + 2 * n],
            "rot_b": [base + 2 * n, base + 3 * n],
            "data_to_ancilla": [base + 3 * n, base + 3 * n + config.n_data],
        })
        base += 3 * n + config.n_data
    return out


def init_params(config: ModelConfig) -> np.ndarray:
    """Near-identity start: uniform in [-0.1, 0.1] radians."""
    rng = np.random.default_rng(config.seed)
    return rng.uniform(-PARAM_INIT_SCALE, PARAM_INIT_SCALE, size=config.n_params)


def forward_batch(x: np.ndarray, theta: np.ndarray, stats: StandardizationStats,
                  config: ModelConfig) -> np.ndarray:
    """(B, K) per-ancilla <Z> for a batch of raw feature rows."""
    x_std = standardize(np.atleast_2d(x), stats)
    states = engine.encode_batch(x_std, config.n_qubits)
    engine.forward_states(states, engine.build_varops(
        config.n_qubits, config.n_data, config.n_layers), np.asarray(theta, dtype=float))
    return engine.expectations(states, config.ancillas)


def forward(x: np.ndarray, theta: np.ndarray, stats: StandardizationStats,
            config: ModelConfig) -> np.ndarray:
    """(K,) per-ancilla <Z> for a single raw feature vector."""
    return forward_batch(np.atleast_2d(x), theta, stats, config)[0]


def predict_proba(expect: np.ndarray) -> np.ndarray:
    """Softmax over the ancilla expectations (last axis)."""
    e = np.asarray(expect, dtype=float)
    shifted = e - e.max(axis=-1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=-1, keepdims=True)


def predict(x: np.ndarray, theta: np.ndarray, stats: StandardizationStats,
            config: ModelConfig) -> int:
    """Class index with the highest probability; ties go to the lowest index."""
    return int(np.argmax(predict_proba(forward(x, theta, stats, config))))


def predict_batch(x: np.ndarray, theta: np.ndarray, stats: StandardizationStats,
                  config: ModelConfig, chunk: int = 64) -> np.ndarray:
    x = np.atleast_2d(x)
    out = np.empty(x.shape[0], dtype=int)
    for start in range(0, x.shape[0], chunk):
        e = forward_batch(x[start:start + chunk], theta, stats, config)
        out[start:start + chunk] = np.argmax(predict_proba(e), axis=1)
    return out


def save_checkpoint(path: Path, config: ModelConfig, stats: StandardizationStats,
                    theta: np.ndarray) -> None:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.n_params,):
        raise ValueError(f"theta has {theta.size} entries, "
                         f"config requires {config.n_params}")
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": {"n_data": config.n_data, "n_ancilla": config.n_ancilla,
                   "n_layers": config.n_layers, "seed": config.seed},
        "stats": {"mean": stats.mean.tolist(), "stddev": stats.stddev.tolist(),
                  "degenerate": stats.degenerate.tolist()},
        "theta": theta.tolist(),
        "layer_map": layer_map(config),
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    tmp.rename(path)


def load_checkpoint(path: Path) -> Tuple[ModelConfig, StandardizationStats, np.ndarray]:
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    config = ModelConfig(**payload["config"])
    stats = StandardizationStats(**payload["stats"])
    theta = np.asarray(payload["theta"], dtype=float)
    if theta.shape != (config.n_params,):
        raise ValueError(f"checkpoint has {theta.size} parameters, "
                         f"config requires {config.n_params}")
    return config, stats, theta
