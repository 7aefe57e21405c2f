"""Synthetic multi-sensor fault signals, noise injection, and dataset files.

The generator stands in for a vibration test rig: every sensor sees the
same machine through its own coupling gain and carrier phase lag. A fault
class multiplies a resonance carrier by a train of exponentially decaying
impulses repeating at the fault characteristic frequency ``fault_hz``;
the healthy class (``fault_hz == 0``) is the bare carrier. White noise is
added on top.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .binfmt import predicted_size, read_container, write_container
from .errors import FormatError, ValidationError
from .graph import Graph, GraphSample, radius_graph, sliding_window_graphs
from .seeding import sub_rng

MAGIC = b"SGWD"


@dataclass(frozen=True)
class ClassSpec:
    name: str
    carrier_hz: float
    fault_hz: float = 0.0
    decay: float = 1000.0
    coupling: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    noise: float = 0.1


def _default_classes():
    return (
        ClassSpec("healthy", 3000.0, 0.0, 0.0, (0.8, 0.8, 0.7, 0.7, 0.6), 0.15),
        ClassSpec("fault_518hz", 4200.0, 518.03, 900.0, (1.0, 0.8, 0.6, 0.4, 0.3), 0.15),
        ClassSpec("fault_760hz", 5400.0, 760.0, 1300.0, (0.4, 0.6, 1.0, 0.6, 0.4), 0.15),
        ClassSpec("fault_1090hz", 6600.0, 1090.0, 1900.0, (0.3, 0.4, 0.6, 0.8, 1.0), 0.15),
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Rig description. ``sensor_phase`` holds each sensor's carrier phase lag (radians)."""

    sensors: int = 5
    fs: float = 20480.0
    length: int = 64_000
    classes: tuple = field(default_factory=_default_classes)
    sensor_phase: tuple = (0.0, 0.6, 1.2, 1.8, 2.4)
    seed: int = 0

    def __post_init__(self):
        classes = tuple(c if isinstance(c, ClassSpec) else ClassSpec(**c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        if self.sensors < 2:
            raise ValidationError("need at least two sensors")
        if len(classes) < 2:
            raise ValidationError("need at least two classes")
        if len(self.sensor_phase) != self.sensors:
            raise ValidationError(f"sensor_phase has {len(self.sensor_phase)} entries for {self.sensors} sensors")
        nyquist = self.fs / 2
        for i, c in enumerate(classes):
            if len(c.coupling) != self.sensors:
                raise ValidationError(f"classes[{i}].coupling has {len(c.coupling)} entries for {self.sensors} sensors")
            if not 0 <= c.fault_hz < nyquist:
                raise ValidationError(f"classes[{i}].fault_hz = {c.fault_hz} must lie in [0, {nyquist})")
            if not 0 < c.carrier_hz < nyquist:
                raise ValidationError(f"classes[{i}].carrier_hz = {c.carrier_hz} must lie in (0, {nyquist})")
            if c.noise < 0 or c.decay < 0:
                raise ValidationError(f"classes[{i}] noise and decay must be nonnegative")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = [{**asdict(c), "coupling": list(c.coupling)} for c in self.classes]
        d["sensor_phase"] = list(self.sensor_phase)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        d["classes"] = tuple(ClassSpec(**{**c, "coupling": tuple(c["coupling"])}) for c in d.get("classes", []))
        if "sensor_phase" in d:
            d["sensor_phase"] = tuple(d["sensor_phase"])
        return cls(**d)


def impulse_onsets(fs: float, fault_hz: float, length: int) -> np.ndarray:
    """Sample indices of fault impulses (nearest sample to k * fs / fault_hz)."""
    if fault_hz <= 0:
        return np.zeros(0, dtype=int)
    period = fs / fault_hz
    return np.unique(np.rint(np.arange(0.0, length, period)).astype(int))


def impulse_envelope(fs: float, fault_hz: float, decay: float, length: int) -> np.ndarray:
    """Superposition of exp(-decay * (t - t_k)) steps at every onset t_k."""
    env = np.zeros(length)
    t = np.arange(length) / fs
    for k in impulse_onsets(fs, fault_hz, length):
        env[k:] += np.exp(-decay * (t[k:] - t[k]))
    return env


def synthesize(spec: SyntheticSpec) -> np.ndarray:
    """Raw records, shape (classes, sensors, length)."""
    rng = sub_rng(spec.seed, "dataset")
    t = np.arange(spec.length) / spec.fs
    phase = np.asarray(spec.sensor_phase, dtype=float)[:, None]
    out = np.empty((spec.n_classes, spec.sensors, spec.length))
    for i, c in enumerate(spec.classes):
        carrier = np.cos(2 * np.pi * c.carrier_hz * t[None, :] - phase)
        if c.fault_hz > 0:
            carrier = carrier * impulse_envelope(spec.fs, c.fault_hz, c.decay, spec.length)[None, :]
        noise = c.noise * rng.standard_normal((spec.sensors, spec.length))
        out[i] = np.asarray(c.coupling, dtype=float)[:, None] * carrier + noise
    return out


def add_noise(signal, snr_db: float, rng=None) -> np.ndarray:
    """Add white Gaussian noise scaled so 10 log10(P_signal / P_noise) equals ``snr_db`` exactly.

    The noise is rescaled to the empirical power of the drawn realization.
    ``rng`` may be a Generator or an integer seed.
    """
    x = np.asarray(signal, dtype=float)
    p_signal = np.mean(x ** 2)
    if p_signal == 0:
        raise ValidationError("cannot set an SNR for a zero-power signal")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    w = rng.standard_normal(x.shape)
    w *= np.sqrt(p_signal / 10 ** (snr_db / 10) / np.mean(w ** 2))
    return x + w


@dataclass
class Dataset:
    """Windowed graph samples sharing one sensor graph."""

    x: np.ndarray
    labels: np.ndarray
    graph: Graph
    metadata: dict

    @property
    def n_classes(self) -> int:
        return len(self.metadata["class_names"])

    @property
    def train_idx(self) -> np.ndarray:
        return np.asarray(self.metadata["split"]["train"], dtype=int)

    @property
    def test_idx(self) -> np.ndarray:
        return np.asarray(self.metadata["split"]["test"], dtype=int)

    @property
    def window(self) -> int:
        return self.x.shape[2]

    def sample(self, i: int) -> GraphSample:
        return GraphSample(self.x[i], self.graph, int(self.labels[i]), index=i)

    @property
    def samples(self) -> list:
        return [self.sample(i) for i in range(len(self))]

    def __len__(self):
        return self.x.shape[0]


def spec_hash(spec: SyntheticSpec, **build_args) -> str:
    doc = {"spec": spec.to_dict(), "build": build_args}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode("utf-8")).hexdigest()


def _stratified_split(labels: np.ndarray, rng, train_fraction: float = 0.8):
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        cut = int(round(train_fraction * idx.size))
        train.extend(idx[:cut].tolist())
        test.extend(idx[cut:].tolist())
    return sorted(train), sorted(test)


def normalize_records(raw: np.ndarray) -> np.ndarray:
    """Max-min normalize each sensor with one affine map shared by every class record."""
    lo = raw.min(axis=(0, 2), keepdims=True)
    hi = raw.max(axis=(0, 2), keepdims=True)
    span = np.where(hi > lo, hi - lo, 1.0)
    return np.where(hi > lo, (raw - lo) / span, 0.0)


def build_dataset(
    spec: SyntheticSpec,
    window: int = 256,
    epsilon: float = 0.9,
    samples_per_class: int = 250,
    snr_db: Optional[float] = None,
    structure: Optional[Graph] = None,
) -> Dataset:
    """Synthesize, (optionally) add noise, normalize, build the sensor graph and window every class.

    The graph comes from the healthy record unless ``structure`` is given.
    ``snr_db`` adds white noise to every raw sensor record before normalization.
    """
    needed = window * samples_per_class
    if needed > spec.length:
        raise ValidationError(f"{samples_per_class} windows of {window} need {needed} samples, record has {spec.length}")
    raw = synthesize(spec)
    if snr_db is not None:
        noise_rng = sub_rng(spec.seed, "noise")
        raw = np.stack([[add_noise(row, snr_db, noise_rng) for row in rec] for rec in raw])
    norm = normalize_records(raw)

    meta_warnings = []
    if structure is None:
        healthy = [i for i, c in enumerate(spec.classes) if c.fault_hz == 0]
        ref = healthy[0] if healthy else 0
        structure = radius_graph(norm[ref], epsilon, labels=[f"sensor{s}" for s in range(spec.sensors)])
    if not structure.adjacency.any():
        meta_warnings.append(f"epsilon={epsilon} produced an edgeless graph")
        warnings.warn(meta_warnings[-1])

    xs, labels = [], []
    for i in range(spec.n_classes):
        samples = sliding_window_graphs(norm[i][:, :needed], window, structure, label=i)
        xs.extend(s.x for s in samples)
        labels.extend([i] * len(samples))
    x = np.stack(xs)
    labels = np.asarray(labels, dtype=int)
    train, test = _stratified_split(labels, sub_rng(spec.seed, "split"))
    build = {"window": window, "epsilon": epsilon, "samples_per_class": samples_per_class, "snr_db": snr_db}
    metadata = {
        "spec": spec.to_dict(),
        "spec_hash": spec_hash(spec, **build),
        "fs": spec.fs,
        "class_names": [c.name for c in spec.classes],
        "fault_hz": [c.fault_hz for c in spec.classes],
        **build,
        "split": {"train": train, "test": test},
        "warnings": meta_warnings,
    }
    return Dataset(x, labels, structure, metadata)


def _header(ds: Dataset) -> dict:
    return {"metadata": ds.metadata, "labels": ds.labels.tolist(), "graph": ds.graph.to_dict()}


def save_dataset(ds: Dataset, path) -> int:
    """Write ``ds`` to ``path``; returns the file size in bytes."""
    return write_container(path, MAGIC, _header(ds), [("x", ds.x)])


def load_dataset(path) -> Dataset:
    header, arrays = read_container(path, MAGIC)
    try:
        x = arrays["x"]
        labels = np.asarray(header["labels"], dtype=int)
        graph = Graph.from_dict(header["graph"])
        metadata = header["metadata"]
    except KeyError as exc:
        raise FormatError(f"dataset file lacks {exc}") from None
    if x.ndim != 3 or x.shape[0] != labels.size:
        raise FormatError(f"sample array of shape {x.shape} does not match {labels.size} labels")
    return Dataset(x, labels, graph, metadata)


def predicted_file_size(ds: Dataset) -> int:
    """Header bytes plus 8 * N * d * M payload bytes."""
    return predicted_size(_header(ds), [("x", ds.x)])
