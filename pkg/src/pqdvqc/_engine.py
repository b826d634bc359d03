"""Batched real-amplitude execution engine for the classifier circuit.

The public simulator in qsim keeps complex amplitudes; this engine
exploits the fact that H/Ry/CRy are real matrices, holding a whole
mini-batch of statevectors in one float64 array of shape (B, 2**n).
It provides forward evaluation, ancilla <Z> readout, adjoint-mode
gradients and the parameter-shift reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as k

RY = 0
CRY = 1

# four-term shift rule coefficients for controlled rotations
# (generator frequencies 1/2 and 1)
_CRY_D1 = (2.0 + math.sqrt(2.0)) / 8.0
_CRY_D2 = (2.0 - math.sqrt(2.0)) / 8.0


@dataclass(frozen=True)
class VarOp:
    kind: int            # RY or CRY
    target: int
    control: int         # -1 for RY
    param_id: int


def build_varops(n_qubits: int, n_data: int, n_layers: int) -> List[VarOp]:
    """Layered ansatz: per layer, rotations on all qubits + ring entangler,
    then rotations on all qubits + data-to-ancilla entanglers."""
    n_anc = n_qubits - n_data
    ops: List[VarOp] = []
    pid = 0
    for _ in range(n_layers):
        for q in range(n_qubits):
            ops.append(VarOp(RY, q, -1, pid)); pid += 1
        for q in range(n_qubits - 1):
            ops.append(VarOp(CRY, q + 1, q, pid)); pid += 1
        ops.append(VarOp(CRY, 0, n_qubits - 1, pid)); pid += 1
        for q in range(n_qubits):
            ops.append(VarOp(RY, q, -1, pid)); pid += 1
        for i in range(n_data):
            ops.append(VarOp(CRY, n_data + (i % n_anc), i, pid)); pid += 1
    return ops


def encode_batch(x_std: np.ndarray, n_qubits: int) -> np.ndarray:
    """Product states after H + Ry(arcsin x) on the data qubits.

    x_std: (B, n_data) in [-1, 1]. Ancilla qubits stay |0>.
    """
    x_std = np.atleast_2d(np.asarray(x_std, dtype=float))
    if np.any(np.abs(x_std) > 1.0 + 1e-12):
        raise ValueError("encoded values must lie in [-1, 1]")
    batch, n_data = x_std.shape
    angles = np.arcsin(np.clip(x_std, -1.0, 1.0))
    half = angles / 2.0
    c, s = np.cos(half), np.sin(half)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    states = np.ones((batch, 1), dtype=np.float64)
    for q in range(n_qubits):
        if q < n_data:
            # Ry(angle) H |0> = ((c - s)/sqrt2, (c + s)/sqrt2)
            qubit = np.stack([(c[:, q] - s[:, q]) * inv_sqrt2,
                              (c[:, q] + s[:, q]) * inv_sqrt2], axis=1)
        else:
            qubit = np.tile(np.array([1.0, 0.0]), (batch, 1))
        # new index = bit_q * 2**q + old index
        states = (qubit[:, :, None] * states[:, None, :]).reshape(batch, -1)
    return states


def _apply_op(states: np.ndarray, op: VarOp, theta: float) -> None:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if op.kind == RY:
        k.apply_ry(states, op.target, c, s)
    else:
        k.apply_cry(states, op.control, op.target, c, s)


def forward_states(states: np.ndarray, ops: Sequence[VarOp],
                   theta: np.ndarray) -> np.ndarray:
    """Apply the variational ops in place; returns states for chaining."""
    for op in ops:
        _apply_op(states, op, float(theta[op.param_id]))
    return states


def expectations(states: np.ndarray, ancillas: Sequence[int]) -> np.ndarray:
    """(B, K) matrix of per-ancilla <Z>."""
    batch = states.shape[0]
    out = np.empty((batch, len(ancillas)))
    buf = np.empty(batch)
    for j, q in enumerate(ancillas):
        k.expect_z_batch(states, q, buf)
        out[:, j] = buf
    return out


def _sign_weights(weights: np.ndarray, ancillas: Sequence[int],
                  size: int) -> np.ndarray:
    """(B, size) diagonal of sum_k w_bk Z_k in the computational basis."""
    idx = np.arange(size)
    diag = np.zeros((weights.shape[0], size))
    for j, q in enumerate(ancillas):
        sign = 1.0 - 2.0 * ((idx >> q) & 1)
        diag += weights[:, j:j + 1] * sign[None, :]
    return diag


def adjoint_gradient(final_states: np.ndarray, ops: Sequence[VarOp],
                     theta: np.ndarray, weights: np.ndarray,
                     ancillas: Sequence[int], n_params: int) -> np.ndarray:
    """Gradient of sum_b sum_k weights[b,k] * E_k(b) over the trainable angles.

    final_states is the post-circuit batch; it is consumed (mutated).
    One reverse sweep; each element of the batch keeps a fixed summation
    order so results are reproducible.
    """
    batch = final_states.shape[0]
    ket = final_states
    bra = ket * _sign_weights(weights, ancillas, ket.shape[1])
    grad = np.zeros(n_params)
    buf = np.empty(batch)
    for op in reversed(ops):
        t = float(theta[op.param_id])
        c, s = math.cos(t / 2.0), math.sin(t / 2.0)
        # single fused pass: rewind ket and bra, accumulate <bra|dU|ket_pre>
        if op.kind == RY:
            k.adjoint_step_ry(ket, bra, op.target, c, s, buf)
        else:
            k.adjoint_step_cry(ket, bra, op.control, op.target, c, s, buf)
        grad[op.param_id] = 2.0 * float(buf.sum())
    return grad


def expectation_jacobian_shift(enc_states: np.ndarray, ops: Sequence[VarOp],
                               theta: np.ndarray, ancillas: Sequence[int],
                               n_params: int) -> np.ndarray:
    """Parameter-shift Jacobian dE_k/dtheta_i, shape (B, K, P).

    Plain rotations use the two-point +-pi/2 rule; controlled rotations
    have generator frequencies {1/2, 1} and need the four-term rule.
    """
    batch = enc_states.shape[0]
    jac = np.zeros((batch, len(ancillas), n_params))

    def evaluate(th: np.ndarray) -> np.ndarray:
        states = enc_states.copy()
        forward_states(states, ops, th)
        return expectations(states, ancillas)

    for op in ops:
        pid = op.param_id
        shifted = theta.copy()
        if op.kind == RY:
            shifted[pid] = theta[pid] + math.pi / 2.0
            e_plus = evaluate(shifted)
            shifted[pid] = theta[pid] - math.pi / 2.0
            e_minus = evaluate(shifted)
            jac[:, :, pid] = (e_plus - e_minus) / 2.0
        else:
            shifted[pid] = theta[pid] + math.pi / 2.0
            e1 = evaluate(shifted)
            shifted[pid] = theta[pid] - math.pi / 2.0
            e2 = evaluate(shifted)
            shifted[pid] = theta[pid] + 3.0 * math.pi / 2.0
            e3 = evaluate(shifted)
            shifted[pid] = theta[pid] - 3.0 * math.pi / 2.0
            e4 = evaluate(shifted)
            jac[:, :, pid] = _CRY_D1 * (e1 - e2) - _CRY_D2 * (e3 - e4)
    return jac
