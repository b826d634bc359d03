"""Acceptance gate: nine pass/fail checks covering simulator correctness,
gradients, the transform, and the shipped experiments at desk scale.

Each test prints one `criterion N: PASS/FAIL` line (visible with -s or in
captured output on failure). The experiment fixtures are session-scoped and
shared, so the seven-class model is trained once and reused.
"""

import time

import numpy as np
import pytest

from pqdvqc import qsim
from pqdvqc.evaluate import confusion_matrix, evaluate
from pqdvqc.experiments import (add_noise_variant, experiment_spec,
                                generate_experiment_waveforms)
from pqdvqc.model import (ModelConfig, fit_standardizer, forward_batch,
                          init_params, predict_proba)
from pqdvqc.signals import SignalSpec, generate_dataset, DisturbanceClass
from pqdvqc.stransform import FeatureSettings, extract_many, stransform, \
    harmonic_track, spectral_matrix
from pqdvqc.signals import Waveform
from pqdvqc.training import (TrainConfig, grad_adjoint, grad_parameter_shift,
                             loss, split_indices, stratified_split, train)
from oracles import finite_difference, random_gates, run_dense

SEED = 11


def _verdict(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def _experiment_features(name, per_class, seed):
    exp = experiment_spec(name, per_class=per_class, seed=seed)
    spec = SignalSpec(rng_seed=seed)
    waveforms, labels = generate_experiment_waveforms(exp, spec)
    x = extract_many(waveforms)
    return exp, waveforms, x, np.asarray(labels, dtype=int)


@pytest.fixture(scope="session")
def single7_run():
    """Seven-class desk-scale run shared by criteria 5, 7 and 8."""
    exp, waveforms, x, y = _experiment_features("single7", 200, SEED)
    tcfg = TrainConfig(epochs=60, batch_size=16, lr=0.05, loss_kind="cce",
                       seed=SEED)
    xtr, ytr, xte, yte = stratified_split(x, y, seed=SEED)
    report = train(xtr, ytr, xte, yte, exp.model, tcfg)
    return exp, waveforms, x, y, report


def test_criterion_1_gate_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        gates = random_gates(rng, n, int(rng.integers(1, 25)))
        state = qsim.init_zero(n)
        for kind, target, control, theta in gates:
            qsim.apply_gate(state, qsim.GateOp(kind, target, control, theta))
        worst = max(worst, float(np.max(np.abs(
            state.amplitudes - run_dense(n, gates)))))
    elapsed = time.perf_counter() - start
    _verdict(1, worst < 1e-12 and elapsed < 10.0,
             f"100 random circuits vs dense oracle, max error {worst:.2e}, "
             f"{elapsed:.1f}s")


def test_criterion_2_gradient_correctness():
    start = time.perf_counter()
    cfg = ModelConfig(n_data=2, n_ancilla=2, n_layers=1, seed=0)
    assert cfg.n_qubits == 4
    rng = np.random.default_rng(1)
    stats = fit_standardizer(rng.normal(size=(20, 2)))

    def f(theta, x, y):
        probs = predict_proba(forward_batch(x[None, :], theta, stats, cfg))
        return loss(probs[0], y, "cce")

    worst_fd = worst_adj = 0.0
    for _ in range(20):
        x = rng.normal(size=2)
        y = int(rng.integers(0, 2))
        theta = rng.uniform(-np.pi, np.pi, cfg.n_params)
        g_shift = grad_parameter_shift(x, y, theta, stats, cfg)
        g_adj = grad_adjoint(x, y, theta, stats, cfg)
        fd = finite_difference(lambda t: f(t, x, y), theta, h=1e-5)
        worst_fd = max(worst_fd, float(np.max(np.abs(g_shift - fd))))
        worst_adj = max(worst_adj, float(np.max(np.abs(g_shift - g_adj))))
    elapsed = time.perf_counter() - start
    _verdict(2, worst_fd < 1e-5 and worst_adj < 1e-8 and elapsed < 60.0,
             f"shift vs finite-diff {worst_fd:.2e}, shift vs adjoint "
             f"{worst_adj:.2e}, {elapsed:.1f}s")


def test_criterion_3_stransform_sanity():
    spec = SignalSpec()
    sine = Waveform(np.sin(2 * np.pi * 50.0 * spec.times), spec,
                    DisturbanceClass.D0_NORMAL)
    track = harmonic_track(spectral_matrix(sine), 1, 50.0)
    guard = int(round(spec.sample_rate_hz / spec.fundamental_hz))
    fund_err = float(np.max(np.abs(track[guard:-guard] - 1.0)))
    rng = np.random.default_rng(2)
    worst_mean = 0.0
    for _ in range(50):
        x = rng.normal(size=2 * int(rng.integers(8, 200)))
        s = stransform(x)
        worst_mean = max(worst_mean, float(np.max(np.abs(s[0] - x.mean()))))
    _verdict(3, fund_err < 0.02 and worst_mean < 1e-12,
             f"unit-sine fundamental error {fund_err:.4f}, row-0 vs mean "
             f"{worst_mean:.2e} over 50 signals")


def test_criterion_4_detection_experiment():
    start = time.perf_counter()
    exp, _, x, y = _experiment_features("detect2", 1000, SEED)
    tcfg = TrainConfig(epochs=25, batch_size=32, lr=0.05, loss_kind="bce",
                       seed=SEED)
    xtr, ytr, xte, yte = stratified_split(x, y, seed=SEED)
    report = train(xtr, ytr, xte, yte, exp.model, tcfg)
    elapsed = time.perf_counter() - start
    _verdict(4, report.best_test_acc >= 0.97 and elapsed <= 1800.0,
             f"detect2 best test accuracy {report.best_test_acc:.4f} "
             f"(2000 samples, 25 epochs, batch 32), {elapsed:.0f}s")


def test_criterion_5_seven_class(single7_run):
    exp, _, _, _, report = single7_run
    acc = report.best_test_acc
    _verdict(5, exp.model.n_qubits == 16 and exp.model.n_layers == 2
             and len(report.epochs) >= 60 and acc >= 0.90,
             f"single7 desk-scale best test accuracy {acc:.4f} "
             f"({exp.model.n_qubits} qubits, {len(report.epochs)} epochs)")


def test_criterion_6_ten_class():
    exp, _, x, y = _experiment_features("mixed10", 200, SEED)
    tcfg = TrainConfig(epochs=25, batch_size=10, lr=0.05, loss_kind="cce",
                       seed=SEED)
    xtr, ytr, xte, yte = stratified_split(x, y, seed=SEED)
    report = train(xtr, ytr, xte, yte, exp.model, tcfg)
    ev = evaluate(xte, yte, report.best_theta, report.stats, exp.model)
    cm = ev.confusion
    errors = cm.sum() - np.trace(cm)
    # labels 5..9 are the transient and composite disturbances D6-D10
    hard_block = cm[5:, 5:].sum() - np.trace(cm[5:, 5:])
    concentrated = errors == 0 or hard_block / errors >= 0.5
    _verdict(6, report.best_test_acc >= 0.85 and concentrated,
             f"mixed10 best test accuracy {report.best_test_acc:.4f}, "
             f"{hard_block}/{errors} errors inside the D6-D10 block")


def test_criterion_7_noise_robustness(single7_run):
    exp, waveforms, x, y, report = single7_run
    _, test_idx = split_indices(y, seed=SEED)
    accs = []
    for snr in (None, 40.0, 30.0, 20.0):
        noisy = add_noise_variant([waveforms[i] for i in test_idx], snr,
                                  SEED + 1)
        x_level = extract_many(noisy) if snr is not None else x[test_idx]
        ev = evaluate(x_level, y[test_idx], report.best_theta, report.stats,
                      exp.model)
        accs.append(ev.accuracy)
    drop = (accs[0] - accs[-1]) * 100.0
    monotone = all(accs[i + 1] <= accs[i] + 0.01 for i in range(3))
    _verdict(7, drop <= 5.0 and monotone,
             "accuracy clean/40/30/20 dB = "
             + "/".join(f"{a:.4f}" for a in accs)
             + f", drop {drop:.2f} points")


def test_criterion_8_parameter_economy():
    cfg = experiment_spec("single7").model
    _verdict(8, cfg.n_params <= 150,
             f"7-class model has {cfg.n_params} trainable parameters")


def test_criterion_9_property_suites():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    # statevector norm preservation
    norms_ok = True
    for _ in range(20):
        n = int(rng.integers(1, 6))
        state = qsim.init_zero(n)
        for kind, target, control, theta in random_gates(rng, n, 30):
            qsim.apply_gate(state, qsim.GateOp(kind, target, control, theta))
        norms_ok &= abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12
    # softmax normalization
    probs = predict_proba(rng.uniform(-1, 1, size=(100, 7)))
    softmax_ok = bool(np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
                      and np.all(probs > 0))
    # confusion-matrix arithmetic
    yt = rng.integers(0, 4, 200)
    yp = rng.integers(0, 4, 200)
    cm = confusion_matrix(yt, yp, 4)
    cm_ok = cm.sum() == 200 and np.trace(cm) == int(np.sum(yt == yp))
    # dataset determinism
    spec = SignalSpec(rng_seed=4)
    a = generate_dataset([DisturbanceClass.D2_SAG], 5, spec)
    b = generate_dataset([DisturbanceClass.D2_SAG], 5, spec)
    det_ok = all(np.array_equal(u.samples, v.samples) for u, v in zip(a, b))
    elapsed = time.perf_counter() - start
    _verdict(9, norms_ok and softmax_ok and cm_ok and det_ok
             and elapsed < 120.0,
             f"norm/softmax/confusion/determinism properties, {elapsed:.1f}s")
