"""Classifier evaluation: confusion matrix and accuracy reporting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import ModelConfig, StandardizationStats, predict_batch


@dataclass
class EvalReport:
    accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray        # rows = true, columns = predicted
    n_params: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": self.per_class_accuracy.tolist(),
            "confusion": self.confusion.tolist(),
            "n_params": self.n_params,
        }


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int],
                     n_classes: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def evaluate(x: np.ndarray, y: np.ndarray, theta: np.ndarray,
             stats: StandardizationStats, config: ModelConfig) -> EvalReport:
    y = np.asarray(y, dtype=int)
    preds = predict_batch(x, theta, stats, config,
                          chunk=max(1, (1 << 22) >> config.n_qubits))
    cm = confusion_matrix(y, preds, config.n_ancilla)
    row_totals = cm.sum(axis=1)
    per_class = np.divide(np.diag(cm), row_totals,
                          out=np.zeros(config.n_ancilla), where=row_totals > 0)
    return EvalReport(float(np.trace(cm) / cm.sum()), per_class, cm,
                      config.n_params)


def write_eval_report(path: Path, report: EvalReport) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    tmp.rename(path)


def write_confusion_csv(path: Path, cm: np.ndarray) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        n = cm.shape[0]
        fh.write("true\\pred," + ",".join(str(j) for j in range(n)) + "\n")
        for i in range(n):
            fh.write(str(i) + "," + ",".join(str(int(v)) for v in cm[i]) + "\n")
    tmp.rename(path)
