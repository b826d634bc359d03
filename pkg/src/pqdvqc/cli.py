"""Command-line pipeline: generate, features, train, eval, sweep.

Reports are written as delimited files with matplotlib renderings
alongside (training curves, confusion heatmap, noise-sweep line).
"""

from __future__ import annotations

import dataclasses
import json
from collections import Counter
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import evaluate as ev
from . import plots
from ._kernels import configure_threads
from .experiments import experiment_spec, generate_experiment_waveforms, add_noise_variant
from .model import ModelConfig, load_checkpoint, save_checkpoint
from .signals import SignalSpec, write_dataset, read_dataset
from .stransform import FeatureSettings, extract_many, write_features, read_features
from .training import TrainConfig, split_indices, stratified_split, train, write_report

PAPER_RATE_HZ = 1280.0
DEFAULT_RATE_HZ = 3200.0


def _signal_spec(rate: float, paper_rate: bool, seed: int) -> SignalSpec:
    return SignalSpec(sample_rate_hz=PAPER_RATE_HZ if paper_rate else rate,
                      rng_seed=seed)


@click.group()
def main() -> None:
    """Power-quality disturbance synthesis, features and QNN classifier."""
    configure_threads()


@main.command()
@click.option("--experiment", required=True,
              type=click.Choice(["detect2", "single7", "mixed10", "noise_sweep"]))
@click.option("--per-class", type=int, default=None, help="Waveforms per class.")
@click.option("--seed", type=int, default=0)
@click.option("--rate", type=float, default=DEFAULT_RATE_HZ, help="Sample rate (Hz).")
@click.option("--paper-rate", is_flag=True, help="Use the published 1280 Hz rate.")
@click.option("--snr", type=float, default=None, help="Inject noise at this SNR (dB).")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def generate(experiment, per_class, seed, rate, paper_rate, snr, out_dir):
    """Synthesize a labeled waveform dataset."""
    out_dir.mkdir(parents=True, exist_ok=True)
    exp = experiment_spec(experiment, per_class, seed)
    spec = _signal_spec(rate, paper_rate, seed)
    waveforms, labels = generate_experiment_waveforms(exp, spec, snr)
    write_dataset(out_dir / "dataset.csv", waveforms, spec, labels)
    counts = Counter(labels)
    for label in sorted(counts):
        click.echo(f"label {label}: {counts[label]} waveforms")
    click.echo(f"wrote {out_dir / 'dataset.csv'}")


@main.command()
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--paper-rate", is_flag=True,
              help="Permit truncating harmonic orders above Nyquist.")
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path))
def features(dataset_path, paper_rate, out_path):
    """Extract the nine-feature vector from every waveform."""
    waveforms, labels, spec = read_dataset(dataset_path)
    settings = FeatureSettings(allow_truncation=paper_rate)
    matrix = extract_many(waveforms, settings)
    out_path = out_path or dataset_path.parent / "features.csv"
    if out_path.is_dir():
        out_path = out_path / "features.csv"
    write_features(out_path, matrix, labels, settings, spec.sample_rate_hz)
    click.echo(f"wrote {matrix.shape[0]} feature rows to {out_path}")


def _train_run(features_path: Path, exp_name: str, out_dir: Path, seed: int,
               epochs: Optional[int], batch: Optional[int], lr: Optional[float],
               layers: Optional[int], grad: Optional[str]):
    x, y = read_features(features_path)
    exp = experiment_spec(exp_name, seed=seed)
    mcfg = exp.model if layers is None \
        else dataclasses.replace(exp.model, n_layers=layers)
    tcfg = exp.train
    overrides = {k: v for k, v in
                 [("epochs", epochs), ("batch_size", batch), ("lr", lr),
                  ("gradient_method", grad)] if v is not None}
    if overrides:
        tcfg = dataclasses.replace(tcfg, **overrides)
    x_tr, y_tr, x_te, y_te = stratified_split(x, y, seed=seed)
    report = train(x_tr, y_tr, x_te, y_te, mcfg, tcfg,
                   log=lambda r: click.echo(
                       f"epoch {r['epoch']:3d}  loss {r['train_loss']:.4f}  "
                       f"train {r['train_acc']:.4f}  test {r['test_acc']:.4f}"))
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out_dir / "checkpoint.json", mcfg, report.stats, report.best_theta)
    write_report(out_dir / "report.jsonl", report)
    with open(out_dir / "curves.csv", "w") as fh:
        fh.write("epoch,train_loss,train_acc,test_acc\n")
        for rec in report.epochs:
            fh.write(f"{rec['epoch']},{rec['train_loss']!r},"
                     f"{rec['train_acc']!r},{rec['test_acc']!r}\n")
    plots.plot_training_curves(report.epochs, out_dir / "curves.png", exp_name)
    click.echo(f"parameters: {mcfg.n_params}")
    click.echo(f"best test accuracy: {report.best_test_acc:.4f} "
               f"(final {report.final_test_acc:.4f})")
    return report, mcfg, (x_te, y_te)


@main.command(name="train")
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--experiment", required=True,
              type=click.Choice(["detect2", "single7", "mixed10"]))
@click.option("--seed", type=int, default=0)
@click.option("--epochs", type=int, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--layers", type=int, default=None)
@click.option("--grad", type=click.Choice(["shift", "adjoint"]), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def train_cmd(features_path, experiment, seed, epochs, batch, lr, layers, grad, out_dir):
    """Train a classifier on an extracted feature file."""
    _train_run(features_path, experiment, out_dir, seed, epochs, batch, lr,
               layers, grad)


@main.command(name="eval")
@click.option("--checkpoint", "ckpt_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def eval_cmd(ckpt_path, features_path, out_dir):
    """Evaluate a checkpoint against a feature file."""
    config, stats, theta = load_checkpoint(ckpt_path)
    x, y = read_features(features_path)
    if x.shape[1] != config.n_data:
        raise click.ClickException(
            f"feature dimension {x.shape[1]} != checkpoint n_data {config.n_data}")
    report = ev.evaluate(x, y, theta, stats, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    ev.write_eval_report(out_dir / "eval.json", report)
    ev.write_confusion_csv(out_dir / "confusion.csv", report.confusion)
    plots.plot_confusion(report.confusion, out_dir / "confusion.png")
    click.echo(f"accuracy: {report.accuracy:.4f} over {int(report.confusion.sum())} rows")


@main.command()
@click.option("--per-class", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--rate", type=float, default=DEFAULT_RATE_HZ)
@click.option("--paper-rate", is_flag=True)
@click.option("--epochs", type=int, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--layers", type=int, default=None)
@click.option("--grad", type=click.Choice(["shift", "adjoint"]), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def sweep(per_class, seed, rate, paper_rate, epochs, batch, lr, layers, grad, out_dir):
    """Seven-class noise robustness: train and evaluate at each SNR level."""
    out_dir.mkdir(parents=True, exist_ok=True)
    exp = experiment_spec("noise_sweep", per_class, seed)
    spec = _signal_spec(rate, paper_rate, seed)
    waveforms, labels = generate_experiment_waveforms(exp, spec)
    write_dataset(out_dir / "dataset.csv", waveforms, spec, labels)
    settings = FeatureSettings(allow_truncation=paper_rate)
    rows = []
    # per-level protocol: noise corrupts every measured waveform, so each
    # level gets its own model trained on that level's features; splits use
    # the same seeded indices, keeping the held-out rows paired across levels
    for snr in exp.snrs_db:
        name = "clean" if snr is None else f"{snr:g}dB"
        noisy = add_noise_variant(waveforms, snr, seed + 1)
        matrix = extract_many(noisy, settings)
        write_features(out_dir / f"features_{name}.csv", matrix, labels,
                       settings, spec.sample_rate_hz)
        click.echo(f"extracted features at {name}")
        level_dir = out_dir / name
        report, config, (x_te, y_te) = _train_run(
            out_dir / f"features_{name}.csv", "single7", level_dir, seed,
            epochs, batch, lr, layers, grad)
        eval_report = ev.evaluate(x_te, y_te, report.best_theta, report.stats,
                                  config)
        ev.write_eval_report(out_dir / f"eval_{name}.json", eval_report)
        ev.write_confusion_csv(out_dir / f"confusion_{name}.csv",
                               eval_report.confusion)
        rows.append((name, eval_report.accuracy))
        click.echo(f"{name}: accuracy {eval_report.accuracy:.4f}")
    with open(out_dir / "sweep.csv", "w") as fh:
        fh.write("level,accuracy\n")
        for name, acc in rows:
            fh.write(f"{name},{acc!r}\n")
    plots.plot_noise_sweep([r[0] for r in rows], [r[1] for r in rows],
                           out_dir / "sweep.png")


if __name__ == "__main__":
    main()
