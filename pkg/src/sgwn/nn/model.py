"""The SGWN classifier, the low-pass aggregation baseline, and the loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chebyshev import build_operator
from ..errors import ValidationError
from ..graph import Graph, GraphSample, eigendecompose, laplacian
from ..kernels import make_kernel
from ..seeding import sub_rng
from ..sgwt import ExactOperator
from .layers import DenseHead, SgwConvLayer, readout, relu, softmax

LOG_CLAMP = 1e-15


@dataclass
class ModelConfig:
    """Architecture of an SGWN; the defaults follow the two-layer, J = K = 2 setup."""

    kernel: str = "mexican_hat"
    J: int = 2
    K: int = 2
    Q: float = 2.0
    depth: int = 2
    hidden: int = 512
    batchnorm: bool = True
    exact: bool = False
    bn_eps: float = 1e-5
    bn_momentum: float = 0.9

    def __post_init__(self):
        for name in ("J", "K", "depth", "hidden"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")


def cross_entropy(probs, labels) -> float:
    """Mean negative log-probability of the true class, log argument clamped at 1e-15."""
    probs = np.atleast_2d(probs)
    labels = np.asarray(labels, dtype=int).ravel()
    p_true = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(p_true, LOG_CLAMP))))


def _ce_grad(probs, labels):
    m = labels.size
    onehot = np.zeros_like(probs)
    onehot[np.arange(m), labels] = 1.0
    # Clamped samples contribute a constant to the loss, hence no gradient.
    live = probs[np.arange(m), labels] > LOG_CLAMP
    return (probs - onehot) * live[:, None] / m


class _Classifier:
    """Shared plumbing: graph-level features -> DenseHead -> softmax."""

    head: DenseHead
    n_classes: int

    def features(self, x, training=False, update_stats=True):
        raise NotImplementedError

    def features_backward(self, dr, cache):
        return {}

    def parameters(self) -> dict:
        raise NotImplementedError

    def buffers(self) -> dict:
        return {}

    def predict_proba(self, x, batch_size: int = 500):
        x = _as_batch(x)
        out = []
        for start in range(0, x.shape[0], batch_size):
            r, _ = self.features(x[start:start + batch_size], training=False)
            logits, _ = self.head.forward(r)
            out.append(softmax(logits))
        return np.concatenate(out) if out else np.zeros((0, self.n_classes))

    def loss(self, x, labels, training=True) -> float:
        """Loss without side effects on running statistics (for finite differences)."""
        r, _ = self.features(_as_batch(x), training=training, update_stats=False)
        logits, _ = self.head.forward(r)
        return cross_entropy(softmax(logits), labels)

    def loss_and_grads(self, x, labels, update_stats=True):
        x = _as_batch(x)
        labels = np.asarray(labels, dtype=int).ravel()
        r, fcache = self.features(x, training=True, update_stats=update_stats)
        logits, hcache = self.head.forward(r)
        probs = softmax(logits)
        dr, grads = self.head.backward(_ce_grad(probs, labels), hcache)
        grads.update(self.features_backward(dr, fcache))
        return cross_entropy(probs, labels), grads


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValidationError(f"expected (batch, nodes, d) input, got shape {x.shape}")
    return x


class SgwnModel(_Classifier):
    """Stacked SGWConv layers, mean readout and a two-layer FC head."""

    def __init__(self, graph: Graph, d: int, n_classes: int, config: ModelConfig | None = None, seed: int = 0):
        self.config = config or ModelConfig()
        self.graph = graph
        self.d = int(d)
        self.n_classes = int(n_classes)
        if self.n_classes < 1:
            raise ValidationError("need at least one class")
        cfg = self.config
        self.laplacian = laplacian(graph)
        self.kernel = make_kernel(cfg.kernel, self.laplacian.lambda_max, J=cfg.J, Q=cfg.Q)
        if cfg.exact:
            self.operator = ExactOperator(self.kernel, eigendecompose(self.laplacian))
        else:
            self.operator = build_operator(self.kernel, self.laplacian, cfg.K)
        self.layers = [
            SgwConvLayer(self.operator, batchnorm=cfg.batchnorm, bn_eps=cfg.bn_eps, bn_momentum=cfg.bn_momentum)
            for _ in range(cfg.depth)
        ]
        self.head = DenseHead(self.d, cfg.hidden, self.n_classes, sub_rng(seed, "init"))

    def parameters(self) -> dict:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, p in layer.params().items():
                out[f"layer{i}.{name}"] = p
        out.update(self.head.params())
        return out

    def buffers(self) -> dict:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, b in layer.buffers().items():
                out[f"layer{i}.{name}"] = b
        return out

    def set_state(self, arrays: dict):
        """Copy arrays (as from ``parameters()``/``buffers()``) into the model."""
        for i, layer in enumerate(self.layers):
            layer.theta[...] = arrays[f"layer{i}.theta"]
            if layer.bn is not None:
                layer.bn.gamma[...] = arrays[f"layer{i}.bn_gamma"]
                layer.bn.beta[...] = arrays[f"layer{i}.bn_beta"]
                layer.bn.running_mean = np.array(arrays[f"layer{i}.bn_running_mean"], dtype=float)
                layer.bn.running_var = np.array(arrays[f"layer{i}.bn_running_var"], dtype=float)
        for name, p in self.head.params().items():
            p[...] = arrays[name]

    def hidden_states(self, x, training=False, update_stats=True):
        """Outputs of every SGWConv layer plus their caches."""
        h = _as_batch(x)
        if h.shape[1:] != (self.graph.num_nodes, self.d):
            raise ValidationError(f"expected samples of shape ({self.graph.num_nodes}, {self.d}), got {h.shape[1:]}")
        caches = []
        for layer in self.layers:
            h, cache = layer.forward(h, training, update_stats)
            caches.append(cache)
        return h, caches

    def features(self, x, training=False, update_stats=True):
        h, caches = self.hidden_states(x, training, update_stats)
        return readout(h), (caches, h.shape[1])

    def features_backward(self, dr, cache):
        caches, n = cache
        dh = np.repeat(dr[:, None, :] / n, n, axis=1)
        grads = {}
        for i in range(len(self.layers) - 1, -1, -1):
            dh, g = self.layers[i].backward(dh, caches[i])
            for name, v in g.items():
                grads[f"layer{i}.{name}"] = v
        return grads


def propagation_matrix(graph: Graph) -> np.ndarray:
    """D~^-1 (A + I): row-normalized mean over each node and its neighbours."""
    a = graph.adjacency + np.eye(graph.num_nodes)
    return a / a.sum(axis=1, keepdims=True)


def lowpass_baseline_forward(x, graph: Graph, depth: int):
    """``depth`` rounds of H <- ReLU(D~^-1 A~ H) on x of shape (..., N, d)."""
    if depth < 1:
        raise ValidationError("depth must be at least 1")
    p = propagation_matrix(graph)
    h = np.asarray(x, dtype=float)
    for _ in range(depth):
        h = relu(p @ h)
    return h


class LowpassBaseline(_Classifier):
    """Parameter-free low-pass aggregation followed by the SGWN readout and FC head."""

    def __init__(self, graph: Graph, d: int, n_classes: int, depth: int = 2, hidden: int = 512, seed: int = 0):
        self.graph = graph
        self.d = int(d)
        self.n_classes = int(n_classes)
        self.depth = int(depth)
        self.head = DenseHead(self.d, hidden, self.n_classes, sub_rng(seed, "init"))

    def parameters(self) -> dict:
        return dict(self.head.params())

    def features(self, x, training=False, update_stats=True):
        return readout(lowpass_baseline_forward(_as_batch(x), self.graph, self.depth)), None


def sgwconv_forward(layer: SgwConvLayer, x, training: bool = False):
    """Single SGWConv layer on one sample (N x d) or a batch."""
    x = np.asarray(x, dtype=float)
    out, _ = layer.forward(x[None] if x.ndim == 2 else x, training)
    return out[0] if x.ndim == 2 else out


def classify(model: _Classifier, sample) -> np.ndarray:
    """Class probabilities for one sample (inference mode)."""
    x = sample.x if isinstance(sample, GraphSample) else sample
    return model.predict_proba(x)[0]


def backward(model: _Classifier, batch) -> tuple[float, dict]:
    """Loss and analytic gradients for ``batch = (x, labels)`` in training mode."""
    x, labels = batch
    return model.loss_and_grads(x, labels)
