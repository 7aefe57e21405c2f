"""Sensor-network graphs, the combinatorial Laplacian and its spectrum.

Graphs here are small (a handful of sensors), undirected and unweighted,
so everything is stored densely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, NumericalError, ValidationError

EIG_ORACLE_LIMIT = 256
LAMBDA_MAX_INFLATION = 1.01


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected, unweighted graph without self-loops."""

    adjacency: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValidationError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise ValidationError("adjacency entries must be 0 or 1")
        if not np.array_equal(a, a.T):
            raise ValidationError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValidationError("adjacency must have a zero diagonal (no self-loops)")
        object.__setattr__(self, "adjacency", _frozen(a))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != a.shape[0]:
                raise ValidationError(f"{len(labels)} labels for {a.shape[0]} nodes")
            object.__setattr__(self, "labels", labels)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.adjacency.tobytes(), self.labels))

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> list:
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return [[int(a), int(b)] for a, b in zip(i, j)]

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        a = np.zeros((n, n))
        for i, j in edges:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"invalid edge ({i}, {j}) for {n} nodes")
            a[i, j] = a[j, i] = 1.0
        return cls(a, labels)

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Relabel nodes so that new node ``k`` is old node ``perm[k]``."""
        perm = np.asarray(perm)
        labels = None if self.labels is None else [self.labels[p] for p in perm]
        return Graph(self.adjacency[np.ix_(perm, perm)], labels)

    def to_dict(self) -> dict:
        return {
            "n": self.num_nodes,
            "edges": self.edges,
            "labels": list(self.labels) if self.labels is not None else [],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        labels = doc.get("labels") or None
        return cls.from_edges(int(doc["n"]), doc.get("edges", []), labels)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LaplacianMatrix:
    """Dense combinatorial Laplacian with a cached upper bound on its spectrum."""

    matrix: np.ndarray
    lambda_max: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns of ``vectors``)."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "vectors", _frozen(self.vectors))

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GraphSample:
    """One graph of a dataset: node features ``x`` (N x d) on a shared structure."""

    x: np.ndarray
    graph: Graph
    label: Optional[int] = None
    index: int = field(default=0, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] != self.graph.num_nodes:
            raise ValidationError(f"node features of shape {x.shape} do not fit a {self.graph.num_nodes}-node graph")
        object.__setattr__(self, "x", x)


def _adjacency_of(graph) -> np.ndarray:
    if isinstance(graph, Graph):
        return graph.adjacency
    a = np.asarray(graph, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"adjacency must be square, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValidationError("adjacency must be symmetric")
    return a


def laplacian(graph, tol: float = 1e-6) -> LaplacianMatrix:
    """Combinatorial Laplacian L = D - A with its (inflated) largest eigenvalue."""
    a = _adjacency_of(graph)
    lap = np.diag(a.sum(axis=1)) - a
    lmax = estimate_lambda_max(lap, tol=tol)
    if lmax == 0.0:
        # Edgeless graph: the spectrum is {0}, so any positive design bound covers it.
        lmax = 1.0
    return LaplacianMatrix(lap, lmax)


def eigendecompose(lap, limit: int = EIG_ORACLE_LIMIT) -> Spectrum:
    """Exact eigendecomposition of a (small) Laplacian, used as a reference path."""
    m = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap, dtype=float)
    n = m.shape[0]
    if n > limit:
        raise CapacityError(f"exact eigendecomposition limited to {limit} nodes, got {n}")
    values, vectors = np.linalg.eigh(m)
    return Spectrum(values, vectors)


def estimate_lambda_max(
    lap,
    tol: float = 1e-6,
    max_iter: int = 10_000,
    inflation: float = LAMBDA_MAX_INFLATION,
    seed: int = 0,
) -> float:
    """Largest eigenvalue of a PSD matrix by power iteration, inflated by ``inflation``.

    Iteration stops once the eigen-residual ``||L v - mu v||`` drops below
    ``tol * mu``. The returned bound is ``mu * inflation`` so that filters
    designed on ``[0, bound]`` cover the true spectrum even if ``mu``
    undershoots slightly.

    Raises:
        NumericalError: if the residual test fails after ``max_iter`` steps;
            ``last_iterate`` carries ``(mu, v)``.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    m = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap, dtype=float)
    n = m.shape[0]
    if not np.any(m):
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(max_iter):
        w = m @ v
        mu = float(v @ w)
        if np.linalg.norm(w - mu * v) <= tol * abs(mu):
            return mu * inflation
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # Start vector landed in the null space.
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = w / norm
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations", last_iterate=(mu, v))


def cosine_similarity_matrix(measurements: np.ndarray) -> np.ndarray:
    x = np.asarray(measurements, dtype=float)
    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValidationError(f"sensor {int(zero[0])} has an all-zero measurement row")
    unit = x / norms[:, None]
    return unit @ unit.T


def radius_graph(measurements: np.ndarray, epsilon: float, labels=None) -> Graph:
    """Connect sensors whose measurement rows have cosine similarity strictly above ``epsilon``."""
    x = np.atleast_2d(np.asarray(measurements, dtype=float))
    if x.shape[0] < 1:
        raise ValidationError("need at least one sensor")
    if not -1.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [-1, 1], got {epsilon}")
    sim = cosine_similarity_matrix(x)
    a = (sim > epsilon).astype(float)
    np.fill_diagonal(a, 0.0)
    # Guard against asymmetric rounding in the similarity product.
    a = np.maximum(a, a.T)
    return Graph(a, labels)


def max_min_normalize(signal) -> np.ndarray:
    """Affine map onto [0, 1]; a constant signal maps to zeros."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ValidationError("cannot normalize an empty signal")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def sliding_window_graphs(measurements: np.ndarray, window: int, structure: Graph, label=None) -> list:
    """Cut an S x P record into floor(P / window) non-overlapping graph samples."""
    x = np.asarray(measurements, dtype=float)
    n_sensors, length = x.shape
    if n_sensors != structure.num_nodes:
        raise ValidationError(f"{n_sensors} sensor rows for a {structure.num_nodes}-node structure")
    if window < 1 or window > length:
        raise ValidationError(f"window {window} does not fit a record of length {length}")
    count = length // window
    return [
        GraphSample(x[:, m * window:(m + 1) * window], structure, label, index=m)
        for m in range(count)
    ]
