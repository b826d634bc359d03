"""Dense statevector simulator for H, Ry and CRy gates.

Basis convention: qubit 0 is the least-significant bit of the basis
index, amplitudes are complex128. Expectations are computed analytically
from the amplitudes; an optional shot-sampled readout exists for noise
studies but is off by default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

MAX_QUBITS = 24

_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


class CapacityError(Exception):
    """Register size outside the supported range."""


def ry_matrix(theta: float) -> np.ndarray:
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass
class GateOp:
    kind: str  # "h" | "ry" | "cry"
    target: int
    control: Optional[int] = None
    theta: Optional[float] = None
    param_id: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("h", "ry", "cry"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cry":
            if self.control is None:
                raise ValueError("cry requires a control qubit")
            if self.control == self.target:
                raise ValueError("control must differ from target")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")
        if self.kind == "h" and (self.theta is not None or self.param_id is not None):
            raise ValueError("h takes no angle")
        if self.kind in ("ry", "cry") and self.theta is None and self.param_id is None:
            raise ValueError(f"{self.kind} needs theta or param_id")


@dataclass
class Circuit:
    n_qubits: int
    ops: list = field(default_factory=list)

    def __post_init__(self):
        pids = [op.param_id for op in self.ops if op.param_id is not None]
        if len(pids) != len(set(pids)):
            raise ValueError("duplicate param_id in circuit")
        if pids and sorted(pids) != list(range(len(pids))):
            raise ValueError("param_ids must be contiguous 0..P-1")
        for op in self.ops:
            _check_indices(op, self.n_qubits)

    @property
    def n_params(self) -> int:
        return sum(1 for op in self.ops if op.param_id is not None)


def _check_indices(g: GateOp, n: int) -> None:
    if not 0 <= g.target < n:
        raise IndexError(f"target {g.target} out of range for {n} qubits")
    if g.control is not None and not 0 <= g.control < n:
        raise IndexError(f"control {g.control} out of range for {n} qubits")


def init_zero(n: int) -> StateVector:
    """|0...0> on an n-qubit register."""
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count {n} outside [1, {MAX_QUBITS}]")
    amp = np.zeros(1 << n, dtype=np.complex128)
    amp[0] = 1.0
    return StateVector(n, amp)


def _apply_single(amp: np.ndarray, n: int, q: int, m: np.ndarray) -> None:
    view = amp.reshape(1 << (n - 1 - q), 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    view[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_controlled(amp: np.ndarray, n: int, ctrl: int, q: int, m: np.ndarray) -> None:
    hi, lo = max(ctrl, q), min(ctrl, q)
    view = amp.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    # axis 1 carries the higher-index qubit, axis 3 the lower one
    if ctrl > q:
        sub = view[:, 1, :, :, :]
        tgt_axis = 2
    else:
        sub = view[:, :, :, 1, :]
        tgt_axis = 1
    a0 = np.take(sub, 0, axis=tgt_axis).copy()
    a1 = np.take(sub, 1, axis=tgt_axis)
    idx0 = [slice(None)] * sub.ndim
    idx0[tgt_axis] = 0
    idx1 = [slice(None)] * sub.ndim
    idx1[tgt_axis] = 1
    sub[tuple(idx0)] = m[0, 0] * a0 + m[0, 1] * a1
    sub[tuple(idx1)] = m[1, 0] * a0 + m[1, 1] * a1


def apply_gate(state: StateVector, g: GateOp) -> StateVector:
    """Apply one gate in place and return the state."""
    _check_indices(g, state.n_qubits)
    if g.kind == "h":
        _apply_single(state.amplitudes, state.n_qubits, g.target, _H_MATRIX)
    elif g.kind == "ry":
        _apply_single(state.amplitudes, state.n_qubits, g.target, ry_matrix(g.theta))
    else:
        _apply_controlled(state.amplitudes, state.n_qubits, g.control, g.target,
                          ry_matrix(g.theta))
    return state


def expect_z(state: StateVector, q: int) -> float:
    """Analytic <Z> of qubit q, in [-1, 1]."""
    if not 0 <= q < state.n_qubits:
        raise IndexError(f"qubit {q} out of range")
    p = np.abs(state.amplitudes) ** 2
    view = p.reshape(1 << (state.n_qubits - 1 - q), 2, 1 << q)
    return float(view[:, 0, :].sum() - view[:, 1, :].sum())


def sample_z(state: StateVector, q: int, shots: int, rng: np.random.Generator) -> float:
    """Shot-sampled <Z> estimate of qubit q."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = np.abs(state.amplitudes) ** 2
    view = p.reshape(1 << (state.n_qubits - 1 - q), 2, 1 << q)
    p1 = float(view[:, 1, :].sum())
    ones = rng.binomial(shots, min(max(p1, 0.0), 1.0))
    return 1.0 - 2.0 * ones / shots


def run_circuit(c: Circuit, thetas: Optional[Sequence[float]] = None) -> StateVector:
    """Execute the circuit from |0...0>, resolving trainable angles by param_id."""
    thetas = np.asarray(thetas, dtype=float) if thetas is not None else np.empty(0)
    state = init_zero(c.n_qubits)
    for op in c.ops:
        if op.param_id is not None:
            if op.param_id >= len(thetas):
                raise ValueError(f"missing value for param_id {op.param_id}")
            op = GateOp(op.kind, op.target, op.control, float(thetas[op.param_id]))
        apply_gate(state, op)
    return state


def circuit_to_json(c: Circuit) -> str:
    """Debug dump of the op list, for golden-file tests."""
    ops = []
    for op in c.ops:
        rec = {"kind": op.kind, "target": op.target}
        if op.control is not None:
            rec["control"] = op.control
        if op.param_id is not None:
            rec["param_id"] = op.param_id
        elif op.theta is not None:
            rec["theta"] = op.theta
        ops.append(rec)
    return json.dumps({"n_qubits": c.n_qubits, "ops": ops}, indent=2)


def circuit_from_json(text: str) -> Circuit:
    data = json.loads(text)
    ops = [GateOp(o["kind"], o["target"], o.get("control"), o.get("theta"),
                  o.get("param_id")) for o in data["ops"]]
    return Circuit(data["n_qubits"], ops)
