"""Layers with hand-written forward and backward passes.

Every ``forward`` returns ``(output, cache)`` and the matching ``backward``
takes ``(grad_output, cache)`` and returns ``(grad_input, param_grads)``.
Batched tensors are laid out (batch, nodes, features).
"""

from __future__ import annotations

import numpy as np

from .. import sgwt
from ..errors import ValidationError


def relu(x):
    return np.maximum(x, 0.0)


class BatchNorm:
    """Per-node normalization over the batch and feature axes, with learnable scale/shift.

    ``momentum`` is the retention factor of the running statistics:
    ``running = momentum * running + (1 - momentum) * batch``.
    """

    def __init__(self, num_nodes: int, eps: float = 1e-5, momentum: float = 0.9):
        self.eps = eps
        self.momentum = momentum
        self.gamma = np.ones(num_nodes)
        self.beta = np.zeros(num_nodes)
        self.running_mean = np.zeros(num_nodes)
        self.running_var = np.ones(num_nodes)

    def forward(self, y, training: bool, update_stats: bool = True):
        if training:
            count = y.shape[0] * y.shape[2]
            mean = y.mean(axis=(0, 2))
            var = y.var(axis=(0, 2))
            if update_stats:
                unbiased = var * count / max(count - 1, 1)
                self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
                self.running_var = self.momentum * self.running_var + (1 - self.momentum) * unbiased
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        y_hat = (y - mean[None, :, None]) * inv_std[None, :, None]
        out = self.gamma[None, :, None] * y_hat + self.beta[None, :, None]
        return out, (y_hat, inv_std, training)

    def backward(self, dout, cache):
        y_hat, inv_std, training = cache
        grads = {"gamma": np.sum(dout * y_hat, axis=(0, 2)), "beta": np.sum(dout, axis=(0, 2))}
        dy_hat = dout * self.gamma[None, :, None]
        if not training:
            return dy_hat * inv_std[None, :, None], grads
        count = dout.shape[0] * dout.shape[2]
        s1 = dy_hat.sum(axis=(0, 2))[None, :, None]
        s2 = (dy_hat * y_hat).sum(axis=(0, 2))[None, :, None]
        dy = (inv_std[None, :, None] / count) * (count * dy_hat - s1 - y_hat * s2)
        return dy, grads


class SgwConvLayer:
    """H = ReLU(BN(W^T diag(theta) W X)) with one learnable theta per band-node pair."""

    def __init__(self, operator, theta=None, batchnorm: bool = True, bn_eps: float = 1e-5, bn_momentum: float = 0.9):
        self.operator = operator
        n, b = operator.num_nodes, operator.band_count
        self.theta = np.ones(b * n) if theta is None else np.array(theta, dtype=float).ravel()
        if self.theta.shape != (b * n,) or not np.all(np.isfinite(self.theta)):
            raise ValidationError(f"theta must hold {b * n} finite values")
        self.bn = BatchNorm(n, bn_eps, bn_momentum) if batchnorm else None

    @property
    def num_nodes(self) -> int:
        return self.operator.num_nodes

    @property
    def band_count(self) -> int:
        return self.operator.band_count

    def params(self) -> dict:
        out = {"theta": self.theta}
        if self.bn is not None:
            out["bn_gamma"] = self.bn.gamma
            out["bn_beta"] = self.bn.beta
        return out

    def buffers(self) -> dict:
        if self.bn is None:
            return {}
        return {"bn_running_mean": self.bn.running_mean, "bn_running_var": self.bn.running_var}

    def forward(self, x, training: bool = False, update_stats: bool = True):
        if x.ndim != 3 or x.shape[1] != self.num_nodes:
            raise ValidationError(f"expected (batch, {self.num_nodes}, d) input, got {x.shape}")
        z = sgwt.forward_array(self.operator, x)
        theta = self.theta.reshape(self.band_count, self.num_nodes)[:, :, None]
        y = sgwt.adjoint_array(self.operator, z * theta)
        bn_cache = None
        if self.bn is not None:
            y, bn_cache = self.bn.forward(y, training, update_stats)
        return relu(y), (z, y, bn_cache)

    def backward(self, dout, cache):
        z, pre, bn_cache = cache
        dy = dout * (pre > 0)
        grads = {}
        if self.bn is not None:
            dy, bn_grads = self.bn.backward(dy, bn_cache)
            grads["bn_gamma"] = bn_grads["gamma"]
            grads["bn_beta"] = bn_grads["beta"]
        # Each band filter is symmetric, so the transpose of W^T is W itself.
        du = sgwt.forward_array(self.operator, dy)
        grads["theta"] = np.sum(du * z, axis=(0, 3)).ravel()
        theta = self.theta.reshape(self.band_count, self.num_nodes)[:, :, None]
        dx = sgwt.adjoint_array(self.operator, du * theta)
        return dx, grads


def readout(h):
    """Mean over the node axis: (..., N, d) -> (..., d)."""
    return np.mean(h, axis=-2)


def glorot_uniform(rng, fan_in: int, fan_out: int):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class DenseHead:
    """FC(d -> hidden) -> ReLU -> FC(hidden -> classes)."""

    def __init__(self, d: int, hidden: int, n_classes: int, rng):
        self.w1 = glorot_uniform(rng, d, hidden)
        self.b1 = np.zeros(hidden)
        self.w2 = glorot_uniform(rng, hidden, n_classes)
        self.b2 = np.zeros(n_classes)

    def params(self) -> dict:
        return {"fc1_w": self.w1, "fc1_b": self.b1, "fc2_w": self.w2, "fc2_b": self.b2}

    def forward(self, r):
        a1 = r @ self.w1 + self.b1
        h1 = relu(a1)
        logits = h1 @ self.w2 + self.b2
        return logits, (r, a1, h1)

    def backward(self, dlogits, cache):
        r, a1, h1 = cache
        grads = {"fc2_w": h1.T @ dlogits, "fc2_b": dlogits.sum(axis=0)}
        da1 = (dlogits @ self.w2.T) * (a1 > 0)
        grads["fc1_w"] = r.T @ da1
        grads["fc1_b"] = da1.sum(axis=0)
        return da1 @ self.w1.T, grads


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
