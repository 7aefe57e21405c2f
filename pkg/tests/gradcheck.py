"""Central-difference gradient checking that is aware of ReLU kinks.

A finite-difference step that moves a ReLU pre-activation across zero
measures a one-sided slope mix, not the derivative. Such entries are
detected by comparing activation masks at both probe points and reported
separately instead of being scored.
"""

import numpy as np

from sgwn.nn import SgwnModel, ModelConfig
from sgwn.nn.layers import readout

from conftest import random_graph

REL_FLOOR = 1e-7


def relu_masks(model, x):
    masks = []
    h = x
    if hasattr(model, "layers"):
        for layer in model.layers:
            h, cache = layer.forward(h, True, False)
            masks.append(cache[1] > 0)
        r = readout(h)
    else:
        r, _ = model.features(x, training=True, update_stats=False)
    _, (_, a1, _) = model.head.forward(r)
    masks.append(a1 > 0)
    return masks


def _same(m1, m2):
    return all(np.array_equal(a, b) for a, b in zip(m1, m2))


def check_gradients(model, x, labels, step=1e-5, names=None):
    """Return (max relative error over scored entries, scored count, kink-skipped count, per-name max)."""
    _, grads = model.loss_and_grads(x, labels, update_stats=False)
    params = model.parameters()
    base = relu_masks(model, x)
    worst, scored, skipped, per_name = 0.0, 0, 0, {}
    for name in names or params:
        p = params[name]
        flat = p.reshape(-1)
        g = grads[name].reshape(-1)
        name_worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp, mp = model.loss(x, labels), relu_masks(model, x)
            flat[i] = orig - step
            lm, mm = model.loss(x, labels), relu_masks(model, x)
            flat[i] = orig
            if not (_same(base, mp) and _same(base, mm)):
                skipped += 1
                continue
            num = (lp - lm) / (2 * step)
            rel = abs(g[i] - num) / max(abs(g[i]), abs(num), REL_FLOOR)
            name_worst = max(name_worst, rel)
            scored += 1
        per_name[name] = name_worst
        worst = max(worst, name_worst)
    return worst, scored, skipped, per_name


def small_model(seed, batchnorm=True, n=5, d=8, n_classes=3, hidden=16, batch=6):
    """Random small SGWN instance with non-trivial theta, plus a batch to check on."""
    rng = np.random.default_rng(seed)
    g = random_graph(n, rng)
    model = SgwnModel(g, d, n_classes, ModelConfig(J=2, K=2, hidden=hidden, batchnorm=batchnorm), seed=seed)
    for layer in model.layers:
        layer.theta[:] = rng.uniform(0.5, 1.5, layer.theta.size)
        if layer.bn is not None:
            layer.bn.gamma[:] = rng.uniform(0.5, 1.5, n)
            layer.bn.beta[:] = rng.uniform(-0.2, 0.2, n)
    model.head.b1[:] = rng.uniform(-0.1, 0.1, hidden)
    x = rng.standard_normal((batch, n, d))
    y = rng.integers(0, n_classes, batch)
    return model, x, y
