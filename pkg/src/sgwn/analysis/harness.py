"""Experiment sweeps: depth (over-smoothing), (J, K) grid, and noise robustness.

Each grid cell is trained from its own seeded config, so cells are
independent and may run in worker processes (``jobs > 1``) without
changing any result.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from ..data import SyntheticSpec, build_dataset
from ..errors import ValidationError
from ..nn.model import LowpassBaseline
from ..nn.train import TrainConfig, make_model, train


def _fit(dataset, config: TrainConfig, kind: str = "sgwn"):
    d, c = dataset.x.shape[2], dataset.n_classes
    if kind == "sgwn":
        model = make_model(dataset.graph, d, c, config)
    elif kind == "lowpass":
        model = LowpassBaseline(dataset.graph, d, c, depth=config.depth, hidden=config.hidden, seed=config.seed)
    else:
        raise ValidationError(f"unknown model kind {kind!r}")
    start = time.perf_counter()
    _, history = train(model, dataset, config)
    elapsed = time.perf_counter() - start
    last = history[-1] if history else {"test_acc": float("nan"), "train_loss": float("nan")}
    return {"test_acc": last["test_acc"], "train_loss": last["train_loss"], "wall_time_s": elapsed}


def _cell(args):
    dataset, config, kind = args
    return _fit(dataset, config, kind)


def _run_cells(cells, jobs: int):
    if jobs <= 1 or len(cells) <= 1:
        return [_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell, cells))


def depth_sweep(dataset, depths, config: TrainConfig, jobs: int = 1) -> list:
    """Train SGWN and the low-pass baseline at each depth; one row per (model, depth)."""
    depths = [int(k) for k in depths]
    if not depths or min(depths) < 1:
        raise ValidationError("depths must be a nonempty list of positive integers")
    keys = [(kind, k) for k in depths for kind in ("sgwn", "lowpass")]
    cells = [(dataset, replace(config, depth=k), kind) for kind, k in keys]
    rows = []
    for (kind, k), res in zip(keys, _run_cells(cells, jobs)):
        rows.append({"model": kind, "depth": k, "test_acc": res["test_acc"], "train_loss": res["train_loss"]})
    return rows


def hyperparam_sweep(dataset, J_values, K_values, config: TrainConfig, repeats: int = 1, jobs: int = 1):
    """Train on the (J, K) grid.

    Returns ``(rows, timings)``. ``rows`` hold J, K, test_acc and train_loss
    and are reproducible. ``timings`` hold the median wall time over
    ``repeats`` runs per cell and are not.
    """
    J_values, K_values = list(J_values), list(K_values)
    if not J_values or not K_values:
        raise ValidationError("J_values and K_values must be nonempty")
    if repeats < 1:
        raise ValidationError("repeats must be positive")
    keys = [(int(j), int(k)) for j in J_values for k in K_values]
    cells = [(dataset, replace(config, J=j, K=k), "sgwn") for j, k in keys for _ in range(repeats)]
    results = _run_cells(cells, jobs)
    rows, timings = [], []
    for i, (j, k) in enumerate(keys):
        runs = results[i * repeats:(i + 1) * repeats]
        rows.append({"J": j, "K": k, "test_acc": runs[0]["test_acc"], "train_loss": runs[0]["train_loss"]})
        timings.append({"J": j, "K": k, "wall_time_s": float(np.median([r["wall_time_s"] for r in runs]))})
    return rows, timings


def _noisy_copy(dataset, snr_db):
    meta = dataset.metadata
    if "spec" not in meta:
        raise ValidationError("noise sweep needs a dataset built from a synthetic spec")
    return build_dataset(
        SyntheticSpec.from_dict(meta["spec"]),
        window=meta["window"],
        epsilon=meta["epsilon"],
        samples_per_class=meta["samples_per_class"],
        snr_db=snr_db,
        structure=dataset.graph,
    )


def _parse_snr(value):
    if value is None or (isinstance(value, str) and value.strip().lower() == "none"):
        return None
    return float(value)


def noise_sweep(dataset, snr_list, config: TrainConfig, jobs: int = 1) -> list:
    """Retrain and evaluate with white noise at each SNR added to the raw records.

    ``"none"`` entries use the clean dataset. Noise is applied before
    normalization to train and test windows alike; the sensor graph stays
    the clean one. An empty list yields a single clean row.
    """
    snrs = [_parse_snr(v) for v in snr_list] or [None]
    cells = [(dataset if s is None else _noisy_copy(dataset, s), config, "sgwn") for s in snrs]
    rows = []
    for s, res in zip(snrs, _run_cells(cells, jobs)):
        rows.append({"snr_db": "none" if s is None else s, "test_acc": res["test_acc"], "train_loss": res["train_loss"]})
    return rows


def accuracy_is_monotone(rows, tolerance: float = 0.03) -> bool:
    """Accuracy nonincreasing as SNR falls (clean first), allowing ``tolerance`` slack."""
    def key(r):
        return float("inf") if r["snr_db"] == "none" else float(r["snr_db"])

    acc = [r["test_acc"] for r in sorted(rows, key=key, reverse=True)]
    return all(b <= a + tolerance for i, a in enumerate(acc) for b in acc[i + 1:])
