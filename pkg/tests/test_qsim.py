"""Statevector simulator checks against dense Kronecker-product references."""

import numpy as np
import pytest

from pqdvqc import qsim
from oracles import (expect_z_dense, gate_matrix, random_gates, run_dense, ry)


def _run(n, gates):
    state = qsim.init_zero(n)
    for kind, target, control, theta in gates:
        qsim.apply_gate(state, qsim.GateOp(kind, target, control, theta))
    return state


def test_ry_matrix_values():
    m = qsim.ry_matrix(np.pi / 3)
    assert np.allclose(m, ry(np.pi / 3))
    assert np.allclose(qsim.ry_matrix(0.0), np.eye(2))
    # Ry(2pi) = -I, a global phase
    assert np.allclose(qsim.ry_matrix(2 * np.pi), -np.eye(2))


def test_init_zero_state():
    s = qsim.init_zero(3)
    assert s.amplitudes.shape == (8,)
    assert s.amplitudes[0] == 1.0
    assert np.all(s.amplitudes[1:] == 0.0)


@pytest.mark.parametrize("n,q", [(1, 0), (2, 0), (2, 1), (3, 1), (4, 3)])
def test_single_gates_match_dense(n, q):
    rng = np.random.default_rng(q + 17 * n)
    theta = float(rng.uniform(-np.pi, np.pi))
    for kind, angle in (("h", None), ("ry", theta)):
        prep = random_gates(rng, n, 4)
        state = _run(n, prep + [(kind, q, None, angle)])
        psi = run_dense(n, prep + [(kind, q, None, angle)])
        assert np.allclose(state.amplitudes, psi, atol=1e-12)


@pytest.mark.parametrize("ctrl,tgt", [(0, 1), (1, 0), (0, 3), (3, 0), (2, 1)])
def test_cry_matches_dense(ctrl, tgt):
    n = 4
    rng = np.random.default_rng(5 * ctrl + tgt)
    theta = float(rng.uniform(-np.pi, np.pi))
    prep = random_gates(rng, n, 6)
    gates = prep + [("cry", tgt, ctrl, theta)]
    state = _run(n, gates)
    assert np.allclose(state.amplitudes, run_dense(n, gates), atol=1e-12)


def test_cry_identity_on_zero_control():
    # control stays |0>, so the rotation must not fire
    state = _run(2, [("cry", 1, 0, 1.234)])
    expected = np.zeros(4, dtype=complex)
    expected[0] = 1.0
    assert np.allclose(state.amplitudes, expected, atol=1e-15)


def test_qubit_zero_is_least_significant():
    # H then Ry(pi) on qubit 0 only populates basis states 0 and 1
    state = _run(3, [("h", 0, None, None)])
    assert abs(state.amplitudes[0]) > 0.5
    assert abs(state.amplitudes[1]) > 0.5
    assert np.all(state.amplitudes[2:] == 0.0)


def test_random_circuits_match_dense():
    rng = np.random.default_rng(99)
    for _ in range(30):
        n = int(rng.integers(1, 5))
        gates = random_gates(rng, n, int(rng.integers(1, 20)))
        state = _run(n, gates)
        psi = run_dense(n, gates)
        assert np.max(np.abs(state.amplitudes - psi)) < 1e-12
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12


def test_expect_z_matches_dense():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(1, 5))
        gates = random_gates(rng, n, 12)
        state = _run(n, gates)
        psi = run_dense(n, gates)
        for q in range(n):
            assert qsim.expect_z(state, q) == pytest.approx(
                expect_z_dense(psi, n, q), abs=1e-12)


def test_expect_z_known_value():
    # Ry(pi/3)|0> gives <Z> = cos(pi/3) = 0.5
    state = _run(1, [("ry", 0, None, np.pi / 3)])
    assert qsim.expect_z(state, 0) == pytest.approx(0.5, abs=1e-12)


def test_sample_z_converges():
    state = _run(1, [("ry", 0, None, np.pi / 3)])
    est = qsim.sample_z(state, 0, shots=200000, rng=np.random.default_rng(0))
    assert est == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        qsim.sample_z(state, 0, shots=0, rng=np.random.default_rng(0))


def test_run_circuit_resolves_params():
    c = qsim.Circuit(2, [
        qsim.GateOp("h", 0),
        qsim.GateOp("ry", 1, param_id=0),
        qsim.GateOp("cry", 1, control=0, param_id=1),
    ])
    assert c.n_params == 2
    thetas = [0.4, -1.1]
    out = qsim.run_circuit(c, thetas)
    psi = run_dense(2, [("h", 0, None, None), ("ry", 1, None, 0.4),
                        ("cry", 1, 0, -1.1)])
    assert np.allclose(out.amplitudes, psi, atol=1e-12)
    with pytest.raises(ValueError):
        qsim.run_circuit(c, [0.4])


def test_gate_validation():
    with pytest.raises(ValueError):
        qsim.GateOp("cx", 0)
    with pytest.raises(ValueError):
        qsim.GateOp("cry", 1, control=1, theta=0.1)
    with pytest.raises(ValueError):
        qsim.GateOp("cry", 1, theta=0.1)
    with pytest.raises(ValueError):
        qsim.GateOp("h", 0, theta=0.3)
    with pytest.raises(ValueError):
        qsim.GateOp("ry", 0)
    with pytest.raises(IndexError):
        qsim.Circuit(2, [qsim.GateOp("ry", 5, theta=0.1)])


def test_circuit_param_id_validation():
    with pytest.raises(ValueError):
        qsim.Circuit(2, [qsim.GateOp("ry", 0, param_id=0),
                         qsim.GateOp("ry", 1, param_id=0)])
    with pytest.raises(ValueError):
        qsim.Circuit(2, [qsim.GateOp("ry", 0, param_id=1)])


def test_capacity_bound():
    with pytest.raises(qsim.CapacityError):
        qsim.init_zero(25)
    with pytest.raises(qsim.CapacityError):
        qsim.init_zero(0)


def test_circuit_json_round_trip():
    c = qsim.Circuit(3, [
        qsim.GateOp("h", 0),
        qsim.GateOp("ry", 1, theta=0.25),
        qsim.GateOp("cry", 2, control=0, param_id=0),
    ])
    back = qsim.circuit_from_json(qsim.circuit_to_json(c))
    assert back.n_qubits == 3
    assert [(o.kind, o.target, o.control, o.theta, o.param_id) for o in back.ops] \
        == [(o.kind, o.target, o.control, o.theta, o.param_id) for o in c.ops]
