"""Numba kernels for batched real-amplitude statevector updates.

Every circuit used by the classifier (H, Ry, CRy) has a real matrix, so
amplitudes of states reachable from |0...0> stay real and are stored as
float64, shape (batch, 2**n_qubits). Qubit 0 is the least-significant bit
of the basis index.

Apply kernels write each amplitude exactly once, so results are bitwise
deterministic for any thread count. Dot-product kernels parallelize over
the batch axis only and accumulate serially within a sample, which keeps
the summation order fixed.
"""

import os

import numpy as np
from numba import njit, prange, set_num_threads

_SQRT1_2 = 1.0 / np.sqrt(2.0)


def configure_threads() -> None:
    """Apply the PQDVQC_THREADS cap, if set."""
    cap = os.environ.get("PQDVQC_THREADS")
    if cap:
        set_num_threads(max(1, int(cap)))


@njit(parallel=True, cache=True)
def apply_ry(state, q, c, s):
    batch, size = state.shape
    mask = 1 << q
    nhigh = size >> (q + 1)
    nlow = mask
    for j in prange(batch * nhigh):
        b = j // nhigh
        base = (j % nhigh) << (q + 1)
        for low in range(nlow):
            i0 = base | low
            i1 = i0 | mask
            a0 = state[b, i0]
            a1 = state[b, i1]
            state[b, i0] = c * a0 - s * a1
            state[b, i1] = s * a0 + c * a1


@njit(parallel=True, cache=True)
def apply_cry(state, ctrl, q, c, s):
    batch, size = state.shape
    mask = 1 << q
    cmask = 1 << ctrl
    nhigh = size >> (q + 1)
    nlow = mask
    for j in prange(batch * nhigh):
        b = j // nhigh
        base = (j % nhigh) << (q + 1)
        for low in range(nlow):
            i0 = base | low
            if i0 & cmask == 0:
                continue
            i1 = i0 | mask
            a0 = state[b, i0]
            a1 = state[b, i1]
            state[b, i0] = c * a0 - s * a1
            state[b, i1] = s * a0 + c * a1


@njit(parallel=True, cache=True)
def apply_h(state, q):
    batch, size = state.shape
    mask = 1 << q
    nhigh = size >> (q + 1)
    nlow = mask
    for j in prange(batch * nhigh):
        b = j // nhigh
        base = (j % nhigh) << (q + 1)
        for low in range(nlow):
            i0 = base | low
            i1 = i0 | mask
            a0 = state[b, i0]
            a1 = state[b, i1]
            state[b, i0] = _SQRT1_2 * (a0 + a1)
            state[b, i1] = _SQRT1_2 * (a0 - a1)


@njit(parallel=True, cache=True)
def adjoint_step_ry(ket, bra, q, c, s, out):
    """One reverse-sweep step for an Ry gate, fused into a single pass.

    Rewinds ket and bra by Ry(-theta) in place and accumulates
    out[b] = <bra_pre| dRy/dtheta |ket_pre> (bra_pre = the un-rewound bra).
    """
    batch, size = ket.shape
    mask = 1 << q
    nhigh = size >> (q + 1)
    nlow = mask
    for b in prange(batch):
        acc = 0.0
        for high in range(nhigh):
            base = high << (q + 1)
            for low in range(nlow):
                i0 = base | low
                i1 = i0 | mask
                k0 = ket[b, i0]
                k1 = ket[b, i1]
                p0 = c * k0 + s * k1   # Ry(-theta) ket: pre-gate state
                p1 = -s * k0 + c * k1
                ket[b, i0] = p0
                ket[b, i1] = p1
                g0 = 0.5 * (-s * p0 - c * p1)
                g1 = 0.5 * (c * p0 - s * p1)
                b0 = bra[b, i0]
                b1 = bra[b, i1]
                acc += b0 * g0 + b1 * g1
                bra[b, i0] = c * b0 + s * b1
                bra[b, i1] = -s * b0 + c * b1
        out[b] = acc


@njit(parallel=True, cache=True)
def adjoint_step_cry(ket, bra, ctrl, q, c, s, out):
    """Fused reverse-sweep step for a CRy gate (control-bit-1 block only)."""
    batch, size = ket.shape
    mask = 1 << q
    cmask = 1 << ctrl
    nhigh = size >> (q + 1)
    nlow = mask
    for b in prange(batch):
        acc = 0.0
        for high in range(nhigh):
            base = high << (q + 1)
            for low in range(nlow):
                i0 = base | low
                if i0 & cmask == 0:
                    continue
                i1 = i0 | mask
                k0 = ket[b, i0]
                k1 = ket[b, i1]
                p0 = c * k0 + s * k1
                p1 = -s * k0 + c * k1
                ket[b, i0] = p0
                ket[b, i1] = p1
                g0 = 0.5 * (-s * p0 - c * p1)
                g1 = 0.5 * (c * p0 - s * p1)
                b0 = bra[b, i0]
                b1 = bra[b, i1]
                acc += b0 * g0 + b1 * g1
                bra[b, i0] = c * b0 + s * b1
                bra[b, i1] = -s * b0 + c * b1
        out[b] = acc


@njit(parallel=True, cache=True)
def expect_z_batch(state, q, out):
    """out[b] = sum over basis of (+1 if bit q == 0 else -1) * amp^2."""
    batch, size = state.shape
    mask = 1 << q
    nhigh = size >> (q + 1)
    nlow = mask
    for b in prange(batch):
        acc = 0.0
        for high in range(nhigh):
            base = high << (q + 1)
            for low in range(nlow):
                i0 = base | low
                i1 = i0 | mask
                acc += state[b, i0] * state[b, i0] - state[b, i1] * state[b, i1]
        out[b] = acc
