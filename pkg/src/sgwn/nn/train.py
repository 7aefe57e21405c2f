"""Mini-batch SGD training with per-epoch learning-rate decay, and evaluation."""

from __future__ import annotations

import copy
import logging
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..errors import NumericalError, ValidationError
from ..seeding import sub_rng
from .model import ModelConfig, SgwnModel

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 100
    lr: float = 0.01
    decay: float = 0.99
    seed: int = 0
    kernel: str = "mexican_hat"
    J: int = 2
    K: int = 2
    Q: float = 2.0
    depth: int = 2
    hidden: int = 512
    batchnorm: bool = True
    exact: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValidationError("epochs must be nonnegative")
        for name in ("batch_size", "lr", "decay"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")

    def model_config(self) -> ModelConfig:
        names = {f.name for f in fields(ModelConfig)}
        return ModelConfig(**{k: v for k, v in asdict(self).items() if k in names})


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray
    predictions: np.ndarray


def make_model(graph, d: int, n_classes: int, config: TrainConfig) -> SgwnModel:
    return SgwnModel(graph, d, n_classes, config.model_config(), seed=config.seed)


def evaluate(model, x, labels, n_classes: int | None = None) -> EvalResult:
    """Argmax accuracy (ties go to the lowest class index) and confusion matrix (rows = truth)."""
    labels = np.asarray(labels, dtype=int).ravel()
    c = n_classes or model.n_classes
    if labels.size == 0:
        return EvalResult(float("nan"), np.zeros((c, c), dtype=int), np.zeros(0, dtype=int))
    pred = np.argmax(model.predict_proba(x), axis=1)
    conf = np.zeros((c, c), dtype=int)
    np.add.at(conf, (labels, pred), 1)
    return EvalResult(float(np.mean(pred == labels)), conf, pred)


def train(model, dataset, config: TrainConfig, train_idx=None, test_idx=None):
    """Train a copy of ``model``; returns ``(trained_model, history)``.

    ``history`` holds one dict per epoch with keys epoch, lr, train_loss
    (sample-weighted mean of the mini-batch losses) and test_acc.
    """
    model = copy.deepcopy(model)
    x, labels = dataset.x, np.asarray(dataset.labels, dtype=int)
    train_idx = np.asarray(dataset.train_idx if train_idx is None else train_idx, dtype=int)
    test_idx = np.asarray(dataset.test_idx if test_idx is None else test_idx, dtype=int)
    if train_idx.size == 0:
        raise ValidationError("training split is empty")
    missing = sorted(set(labels.tolist()) - set(labels[train_idx].tolist()))
    if missing:
        raise ValidationError(f"classes {missing} have no training samples")

    rng = sub_rng(config.seed, "shuffle")
    params = model.parameters()
    lr = config.lr
    history = []
    for epoch in range(1, config.epochs + 1):
        order = train_idx[rng.permutation(train_idx.size)]
        total = 0.0
        for start in range(0, order.size, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = model.loss_and_grads(x[batch], labels[batch])
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting at position {start}")
            total += loss * batch.size
            for name, p in params.items():
                p -= lr * grads[name]
        test_acc = evaluate(model, x[test_idx], labels[test_idx]).accuracy
        history.append({"epoch": epoch, "lr": lr, "train_loss": total / order.size, "test_acc": test_acc})
        log.debug("epoch %d lr %.5g loss %.6g acc %.4f", epoch, lr, total / order.size, test_acc)
        lr *= config.decay
    return model, history
