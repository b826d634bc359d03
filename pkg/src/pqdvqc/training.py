"""Loss, gradients and the mini-batch training loop.

Two gradient paths: the parameter-shift rule (reference; exact circuit
evaluations at shifted angles) and adjoint differentiation (one forward
pass plus one reverse sweep, used by default for speed). Both are exact
and agree to numerical precision.

Parameter updates use Adam with bias correction.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _engine as engine
from .model import (ModelConfig, StandardizationStats, fit_standardizer,
                    init_params, predict_proba, standardize)

LOG_FLOOR = 1e-12


class TrainingError(Exception):
    """Non-recoverable failure inside the optimization loop."""


@dataclass
class TrainConfig:
    epochs: int = 25
    batch_size: int = 32
    lr: float = 0.01
    loss_kind: str = "cce"             # "bce" (2-class) or "cce"
    gradient_method: str = "adjoint"   # "adjoint" or "shift"
    seed: int = 0
    shuffle: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.loss_kind not in ("bce", "cce"):
            raise ValueError(f"unknown loss {self.loss_kind!r}")
        if self.gradient_method not in ("adjoint", "shift"):
            raise ValueError(f"unknown gradient method {self.gradient_method!r}")


@dataclass
class AdamState:
    n_params: int
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        self.m = np.zeros(self.n_params)
        self.v = np.zeros(self.n_params)


def loss(probs: np.ndarray, y: int, kind: str = "cce") -> float:
    """Per-sample cross entropy from softmax probabilities.

    For two classes, binary cross entropy on p(class 1) coincides with
    categorical cross entropy because p0 + p1 = 1.
    """
    probs = np.asarray(probs, dtype=float)
    if not 0 <= y < probs.size:
        raise ValueError(f"label {y} out of range for {probs.size} classes")
    if kind == "bce":
        if probs.size != 2:
            raise ValueError("bce requires exactly 2 classes")
        p1 = probs[1]
        return float(-(y * np.log(max(p1, LOG_FLOOR))
                       + (1 - y) * np.log(max(1.0 - p1, LOG_FLOOR))))
    return float(-np.log(max(probs[y], LOG_FLOOR)))


def _loss_grad_wrt_expectations(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(mean cross entropy)/dE through the softmax: (p - onehot) / B."""
    batch, n_classes = probs.shape
    grad = probs.copy()
    grad[np.arange(batch), y] -= 1.0
    return grad / batch


def _varops(config: ModelConfig):
    return engine.build_varops(config.n_qubits, config.n_data, config.n_layers)


def batch_gradient(x: np.ndarray, y: np.ndarray, theta: np.ndarray,
                   stats: StandardizationStats, config: ModelConfig,
                   kind: str = "cce", method: str = "adjoint"
                   ) -> Tuple[np.ndarray, float, np.ndarray]:
    """Mean loss gradient over a batch.

    Returns (gradient of the batch-mean loss, batch-mean loss, probs).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=int)
    theta = np.asarray(theta, dtype=float)
    ops = _varops(config)
    enc = engine.encode_batch(standardize(x, stats), config.n_qubits)
    if method == "adjoint":
        states = enc  # consumed in place
        engine.forward_states(states, ops, theta)
        expect = engine.expectations(states, config.ancillas)
        probs = predict_proba(expect)
        weights = _loss_grad_wrt_expectations(probs, y)
        grad = engine.adjoint_gradient(states, ops, theta, weights,
                                       config.ancillas, config.n_params)
    elif method == "shift":
        states = enc.copy()
        engine.forward_states(states, ops, theta)
        expect = engine.expectations(states, config.ancillas)
        probs = predict_proba(expect)
        weights = _loss_grad_wrt_expectations(probs, y)
        jac = engine.expectation_jacobian_shift(enc, ops, theta,
                                                config.ancillas, config.n_params)
        grad = np.einsum("bk,bkp->p", weights, jac)
    else:
        raise ValueError(f"unknown gradient method {method!r}")
    mean_loss = float(np.mean([loss(p, int(label), kind)
                               for p, label in zip(probs, y)]))
    return grad, mean_loss, probs


def grad_parameter_shift(x: np.ndarray, y: int, theta: np.ndarray,
                         stats: StandardizationStats, config: ModelConfig,
                         kind: str = "cce") -> np.ndarray:
    """Single-sample loss gradient via the parameter-shift rule."""
    grad, _, _ = batch_gradient(np.atleast_2d(x), np.array([y]), theta, stats,
                                config, kind, method="shift")
    return grad


def grad_adjoint(x: np.ndarray, y: int, theta: np.ndarray,
                 stats: StandardizationStats, config: ModelConfig,
                 kind: str = "cce") -> np.ndarray:
    """Single-sample loss gradient via adjoint differentiation."""
    grad, _, _ = batch_gradient(np.atleast_2d(x), np.array([y]), theta, stats,
                                config, kind, method="adjoint")
    return grad


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameters."""
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        bad = np.flatnonzero(~np.isfinite(grad))
        raise TrainingError(f"non-finite gradient components at {bad[:5].tolist()}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad ** 2
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def split_indices(y: np.ndarray, test_fraction: float = 0.2,
                  seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded per-class (train_idx, test_idx) partition."""
    rng = np.random.default_rng(seed)
    y = np.asarray(y, dtype=int)
    train_idx, test_idx = [], []
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        n_test = max(1, int(round(idx.size * test_fraction)))
        test_idx.extend(idx[:n_test])
        train_idx.extend(idx[n_test:])
    return np.sort(np.array(train_idx)), np.sort(np.array(test_idx))


def stratified_split(x: np.ndarray, y: np.ndarray, test_fraction: float = 0.2,
                     seed: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Seeded per-class split into (x_train, y_train, x_test, y_test)."""
    y = np.asarray(y, dtype=int)
    train_idx, test_idx = split_indices(y, test_fraction, seed)
    return x[train_idx], y[train_idx], x[test_idx], y[test_idx]


@dataclass
class TrainReport:
    epochs: List[dict]
    theta: np.ndarray          # parameters after the final epoch
    best_theta: np.ndarray     # parameters at the best test-accuracy epoch
    stats: StandardizationStats
    config: ModelConfig
    train_config: TrainConfig
    wall_time_s: float

    @property
    def best_test_acc(self) -> float:
        return max(rec["test_acc"] for rec in self.epochs)

    @property
    def final_test_acc(self) -> float:
        return self.epochs[-1]["test_acc"]


def _accuracy(x: np.ndarray, y: np.ndarray, theta: np.ndarray,
              stats: StandardizationStats, config: ModelConfig) -> float:
    ops = _varops(config)
    chunk = max(1, (1 << 22) >> config.n_qubits)
    correct = 0
    for start in range(0, x.shape[0], chunk):
        block = x[start:start + chunk]
        states = engine.encode_batch(standardize(block, stats), config.n_qubits)
        engine.forward_states(states, ops, theta)
        expect = engine.expectations(states, config.ancillas)
        correct += int(np.sum(np.argmax(expect, axis=1) == y[start:start + chunk]))
    return correct / x.shape[0]


def train(x_train: np.ndarray, y_train: np.ndarray, x_test: np.ndarray,
          y_test: np.ndarray, config: ModelConfig, tcfg: TrainConfig,
          log: Optional[callable] = None) -> TrainReport:
    """Mini-batch gradient descent per the layered-circuit model.

    Shuffles per epoch with a seeded generator, averages per-sample
    gradients over each batch, and records train loss / train accuracy /
    test accuracy per epoch. Deterministic for a fixed seed and method.
    """
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train, dtype=int)
    if x_train.size == 0 or np.asarray(x_test).size == 0:
        raise ValueError("empty train or test split")
    if x_train.shape[1] != config.n_data:
        raise ValueError(f"feature dimension {x_train.shape[1]} != "
                         f"config n_data {config.n_data}")
    if y_train.max() >= config.n_ancilla or np.asarray(y_test).max() >= config.n_ancilla:
        raise ValueError("label out of range for the configured class count")

    stats = fit_standardizer(x_train)
    theta = init_params(config)
    opt = AdamState(config.n_params, lr=tcfg.lr, beta1=tcfg.beta1,
                    beta2=tcfg.beta2, eps=tcfg.eps)
    rng = np.random.default_rng(tcfg.seed)
    records: List[dict] = []
    best_theta = theta.copy()
    best_acc = -1.0
    start_time = time.perf_counter()
    for epoch in range(tcfg.epochs):
        order = rng.permutation(len(y_train)) if tcfg.shuffle \
            else np.arange(len(y_train))
        losses = []
        correct = 0
        for lo in range(0, len(order), tcfg.batch_size):
            batch = order[lo:lo + tcfg.batch_size]
            grad, batch_loss, probs = batch_gradient(
                x_train[batch], y_train[batch], theta, stats, config,
                kind=tcfg.loss_kind, method=tcfg.gradient_method)
            theta = adam_step(opt, theta, grad)
            losses.append(batch_loss * len(batch))
            correct += int(np.sum(np.argmax(probs, axis=1) == y_train[batch]))
        rec = {
            "epoch": epoch + 1,
            "train_loss": float(np.sum(losses) / len(order)),
            # running accuracy over the epoch's mini-batches (pre-update params)
            "train_acc": correct / len(order),
            "test_acc": _accuracy(np.asarray(x_test, dtype=float),
                                  np.asarray(y_test, dtype=int), theta, stats, config),
            "seconds": time.perf_counter() - start_time,
        }
        records.append(rec)
        if rec["test_acc"] > best_acc:
            best_acc = rec["test_acc"]
            best_theta = theta.copy()
        if log is not None:
            log(rec)
    return TrainReport(records, theta, best_theta, stats, config, tcfg,
                       time.perf_counter() - start_time)


def write_report(path: Path, report: TrainReport) -> None:
    """JSON lines, one record per epoch."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        for rec in report.epochs:
            fh.write(json.dumps(rec) + "\n")
    tmp.rename(path)
