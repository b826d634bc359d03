"""Power-quality disturbance synthesis, S-transform features, and a
variational quantum classifier on a dense statevector simulator."""

__version__ = "0.1.0"

from .signals import DisturbanceClass, SignalSpec, Waveform, synthesize, add_awgn, generate_dataset
from .stransform import FeatureSettings, FeatureVector, dft, stransform, extract_features
from .qsim import StateVector, GateOp, Circuit, init_zero, apply_gate, expect_z, run_circuit
from .model import ModelConfig, StandardizationStats, fit_standardizer, standardize, forward, predict_proba, predict
from .training import TrainConfig, AdamState, train

__all__ = [
    "DisturbanceClass", "SignalSpec", "Waveform", "synthesize", "add_awgn", "generate_dataset",
    "FeatureSettings", "FeatureVector", "dft", "stransform", "extract_features",
    "StateVector", "GateOp", "Circuit", "init_zero", "apply_gate", "expect_z", "run_circuit",
    "ModelConfig", "StandardizationStats", "fit_standardizer", "standardize",
    "forward", "predict_proba", "predict",
    "TrainConfig", "AdamState", "train",
]
