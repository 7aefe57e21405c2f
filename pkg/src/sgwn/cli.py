"""Command-line front end.

Usage::

    sgwn <command> [--config FILE] [--out DIR] [--seed N] [key=value ...]

Configuration is a flat TOML file with dotted keys (``train.epochs = 60``);
``key=value`` arguments override it, values parsed as TOML literals.
Every run writes ``manifest.json`` listing its outputs with SHA-256 hashes.

Exit codes: 0 success, 2 configuration error, 3 missing or unreadable
input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import (
    depth_sweep,
    feature_ses_report,
    hyperparam_sweep,
    line_plot,
    locate_fault_frequency,
    noise_sweep,
    squared_envelope_spectrum,
    write_csv,
    write_json,
)
from .analysis.ses import band_names
from .data import ClassSpec, SyntheticSpec, build_dataset, load_dataset, save_dataset
from .errors import ConfigurationError, FormatError, NumericalError, SgwnError, ValidationError
from .kernels import FAMILIES, frame_profile, make_kernel
from .nn import TrainConfig, evaluate, load_checkpoint, make_model, save_checkpoint, train
from .sgwt import forward_array

log = logging.getLogger("sgwn")

EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_NUMERICAL = 0, 2, 3, 4

_DEFAULT_CLASSES = SyntheticSpec().classes

# key -> (type, default); list contents are validated where they are used.
SCHEMA = {
    "seed": (int, 0),
    "out": (str, "sgwn-out"),
    "jobs": (int, 1),
    "plot": (bool, True),
    "data.path": (str, ""),
    "data.sensors": (int, 5),
    "data.fs": (float, 20480.0),
    "data.length": (int, 64_000),
    "data.window": (int, 256),
    "data.epsilon": (float, 0.9),
    "data.samples_per_class": (int, 250),
    "data.class_names": (list, [c.name for c in _DEFAULT_CLASSES]),
    "data.carrier_hz": (list, [c.carrier_hz for c in _DEFAULT_CLASSES]),
    "data.fault_hz": (list, [c.fault_hz for c in _DEFAULT_CLASSES]),
    "data.decay": (list, [c.decay for c in _DEFAULT_CLASSES]),
    "data.noise": (list, [c.noise for c in _DEFAULT_CLASSES]),
    "data.coupling": (list, [list(c.coupling) for c in _DEFAULT_CLASSES]),
    "data.sensor_phase": (list, list(SyntheticSpec().sensor_phase)),
    "model.path": (str, ""),
    "train.epochs": (int, 60),
    "train.batch_size": (int, 100),
    "train.lr": (float, 0.01),
    "train.decay": (float, 0.99),
    "train.kernel": (str, "mexican_hat"),
    "train.J": (int, 2),
    "train.K": (int, 2),
    "train.Q": (float, 2.0),
    "train.depth": (int, 2),
    "train.hidden": (int, 512),
    "train.batchnorm": (bool, True),
    "train.exact": (bool, False),
    "filters.kernel": (str, "mexican_hat"),
    "filters.J": (int, 5),
    "filters.Q": (float, 2.0),
    "filters.lambda_max": (float, 2.0),
    "filters.points": (int, 1001),
    "transform.sample": (int, 0),
    "ses.source": (str, "am"),
    "ses.fs": (float, 20480.0),
    "ses.n": (int, 4096),
    "ses.fm": (float, 50.0),
    "ses.fc": (float, 3000.0),
    "ses.sample": (int, -1),
    "ses.node": (int, 0),
    "ses.target_hz": (float, -1.0),
    "sweep.depths": (list, [2, 4, 6, 8, 10]),
    "sweep.J_values": (list, [2, 3, 4, 5, 6]),
    "sweep.K_values": (list, [2]),
    "sweep.repeats": (int, 1),
    "sweep.snr": (list, ["none", 0, -3, -5]),
}

_POSITIVE = {
    "jobs", "data.sensors", "data.fs", "data.length", "data.window", "data.samples_per_class",
    "train.batch_size", "train.lr", "train.decay", "train.J", "train.K", "train.Q", "train.depth",
    "train.hidden", "filters.J", "filters.Q", "filters.lambda_max", "ses.fs", "ses.n", "sweep.repeats",
}


@dataclass
class RunConfig:
    command: str
    config_path: str | None = None
    out_dir: Path = Path("sgwn-out")
    seed: int = 0
    overrides: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def _flatten(doc: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key, value


def _check(key: str, value):
    kind, _ = SCHEMA[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is bool and not isinstance(value, bool):
        raise ConfigurationError(f"{key}: expected true/false, got {value!r}")
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
    if not isinstance(value, kind):
        raise ConfigurationError(f"{key}: expected {kind.__name__}, got {value!r}")
    if key in _POSITIVE and not value > 0:
        raise ConfigurationError(f"{key}: must be positive, got {value!r}")
    return value


def load_config(command: str, config_path=None, overrides=(), out=None, seed=None) -> RunConfig:
    """Merge defaults, the config file and overrides, then validate every key."""
    values = {k: v for k, (_, v) in SCHEMA.items()}
    supplied = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise FileNotFoundError(f"config file {path} not found")
        try:
            supplied.update(_flatten(tomllib.loads(path.read_text(encoding="utf-8"))))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    for item in overrides:
        key, value = _parse_override(item)
        supplied[key] = value
    if out is not None:
        supplied["out"] = out
    if seed is not None:
        supplied["seed"] = seed
    for key, value in supplied.items():
        if key not in SCHEMA:
            raise ConfigurationError(f"{key}: unknown configuration key")
        values[key] = _check(key, value)
    out_dir = Path(values["out"])
    if not values["data.path"]:
        values["data.path"] = str(out_dir / "dataset.sgwd")
    if not values["model.path"]:
        values["model.path"] = str(out_dir / "model.sgwn")
    if values["train.kernel"] not in FAMILIES:
        raise ConfigurationError(f"train.kernel: unknown kernel family {values['train.kernel']!r}")
    if values["filters.kernel"] not in FAMILIES:
        raise ConfigurationError(f"filters.kernel: unknown kernel family {values['filters.kernel']!r}")
    if values["ses.source"] not in ("am", "sample"):
        raise ConfigurationError("ses.source: expected 'am' or 'sample'")
    synthetic_spec(values)
    train_config(values)
    return RunConfig(command, config_path, out_dir, values["seed"], list(overrides), values)


def synthetic_spec(values: dict) -> SyntheticSpec:
    lists = ("class_names", "carrier_hz", "fault_hz", "decay", "noise", "coupling")
    cols = {k: values[f"data.{k}"] for k in lists}
    n = len(cols["class_names"])
    for k, v in cols.items():
        if len(v) != n:
            raise ConfigurationError(f"data.{k}: has {len(v)} entries, data.class_names has {n}")
    try:
        classes = tuple(
            ClassSpec(str(cols["class_names"][i]), float(cols["carrier_hz"][i]), float(cols["fault_hz"][i]),
                      float(cols["decay"][i]), tuple(float(c) for c in cols["coupling"][i]), float(cols["noise"][i]))
            for i in range(n)
        )
        return SyntheticSpec(
            sensors=values["data.sensors"], fs=values["data.fs"], length=values["data.length"], classes=classes,
            sensor_phase=tuple(float(p) for p in values["data.sensor_phase"]), seed=values["seed"],
        )
    except ValidationError as exc:
        raise ConfigurationError(f"data: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"data: malformed class definition ({exc})") from None


def train_config(values: dict) -> TrainConfig:
    kw = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("train.")}
    try:
        return TrainConfig(seed=values["seed"], **kw)
    except ValidationError as exc:
        raise ConfigurationError(f"train: {exc}") from None


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(run: RunConfig, files: list, volatile: list = ()) -> Path:
    """List outputs with content hashes. Volatile files (wall-clock timings) are listed without one."""
    entries = [{"path": p.name, "bytes": p.stat().st_size, "sha256": _sha256(p)} for p in files]
    entries += [{"path": p.name, "bytes": None, "sha256": None, "volatile": True} for p in volatile]
    doc = {"command": run.command, "seed": run.seed, "config": run.values, "files": entries}
    return write_json(run.out_dir / "manifest.json", doc)


def _require(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"required input {path} not found")
    return path


def _sidecar(run: RunConfig, prefix: str) -> dict:
    keys = {k: v for k, v in run.values.items() if k.split(".")[0] in (prefix, "train", "seed", "jobs")}
    return {"command": run.command, "seed": run.seed, "sub_seeds": ["dataset", "init", "shuffle", "noise", "split"],
            "config": keys}


def cmd_synth(run: RunConfig) -> list:
    v = run.values
    ds = build_dataset(synthetic_spec(v), window=v["data.window"], epsilon=v["data.epsilon"],
                       samples_per_class=v["data.samples_per_class"])
    path = Path(v["data.path"])
    path.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, path)
    meta = run.out_dir / (path.stem + ".json")
    write_json(meta, {**ds.metadata, "n_samples": len(ds), "graph": ds.graph.to_dict()})
    log.info("wrote %d samples to %s", len(ds), path)
    return [path, meta]


def _load_dataset(run):
    return load_dataset(_require(run["data.path"]))


def _history_csv(path, history):
    return write_csv(path, history, ["epoch", "lr", "train_loss", "test_acc"])


def _metrics(model, ds) -> dict:
    res = evaluate(model, ds.x[ds.test_idx], ds.labels[ds.test_idx], ds.n_classes)
    return {"test_accuracy": res.accuracy, "confusion": res.confusion, "n_test": int(ds.test_idx.size),
            "class_names": ds.metadata.get("class_names", [])}


def cmd_train(run: RunConfig) -> list:
    ds = _load_dataset(run)
    cfg = train_config(run.values)
    model = make_model(ds.graph, ds.x.shape[2], ds.n_classes, cfg)
    model, history = train(model, ds, cfg)
    ckpt = Path(run["model.path"])
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, ckpt)
    hist = _history_csv(run.out_dir / "history.csv", history)
    metrics = write_json(run.out_dir / "metrics.json", _metrics(model, ds))
    log.info("test accuracy %.4f", _metrics(model, ds)["test_accuracy"])
    return [ckpt, hist, metrics]


def cmd_evaluate(run: RunConfig) -> list:
    ds = _load_dataset(run)
    model = load_checkpoint(_require(run["model.path"]))
    return [write_json(run.out_dir / "evaluation.json", _metrics(model, ds))]


def cmd_filters(run: RunConfig) -> list:
    v = run.values
    spec = make_kernel(v["filters.kernel"], v["filters.lambda_max"], J=v["filters.J"], Q=v["filters.Q"])
    prof = frame_profile(spec, v["filters.points"])
    cols = {"lambda": prof.lam}
    if prof.h is not None:
        cols["h"] = prof.h
    for j in range(spec.J):
        cols[f"g{j + 1}"] = prof.g[j]
    cols["sum_sq"] = prof.sum_sq
    rows = [{k: float(c[i]) for k, c in cols.items()} for i in range(prof.lam.size)]
    out = [write_csv(run.out_dir / "filters.csv", rows, list(cols))]
    if v["plot"]:
        series = [(k, prof.lam, c) for k, c in cols.items() if k != "lambda"]
        out.append(line_plot(run.out_dir / "filters.svg", series, "lambda", "response", f"{spec.family} filter bank"))
    return out


def cmd_transform(run: RunConfig) -> list:
    ds = _load_dataset(run)
    idx = run["transform.sample"]
    if not 0 <= idx < len(ds):
        raise ConfigurationError(f"transform.sample: {idx} out of range for {len(ds)} samples")
    cfg = train_config(run.values)
    model = make_model(ds.graph, ds.x.shape[2], ds.n_classes, cfg)
    coeffs = forward_array(model.operator, ds.x[idx][None])[0]
    names = band_names(model.kernel)
    rows = []
    for b in range(coeffs.shape[0]):
        for n in range(coeffs.shape[1]):
            rows.append({"band": names[b], "node": n, **{f"t{t}": float(c) for t, c in enumerate(coeffs[b, n])}})
    cols = ["band", "node"] + [f"t{t}" for t in range(coeffs.shape[2])]
    csv_path = write_csv(run.out_dir / "transform.csv", rows, cols)
    side = write_json(run.out_dir / "transform.json", {**_sidecar(run, "transform"), "provenance": model.operator.provenance,
                                                      "label": int(ds.labels[idx]), "bands": names})
    return [csv_path, side]


def cmd_ses(run: RunConfig) -> list:
    v = run.values
    if v["ses.source"] == "am":
        fs, n = v["ses.fs"], v["ses.n"]
        t = np.arange(n) / fs
        x = (1 + 0.5 * np.cos(2 * np.pi * v["ses.fm"] * t)) * np.cos(2 * np.pi * v["ses.fc"] * t)
        results = [squared_envelope_spectrum(x, fs, "am")]
        target = v["ses.target_hz"] if v["ses.target_hz"] >= 0 else v["ses.fm"]
    else:
        ds = _load_dataset(run)
        fs = float(ds.metadata.get("fs", v["ses.fs"]))
        idx = v["ses.sample"]
        if idx < 0:
            faulty = [i for i in ds.test_idx if ds.metadata["fault_hz"][ds.labels[i]] > 0]
            if not faulty:
                raise ConfigurationError("ses.sample: dataset has no faulty test sample to pick")
            idx = int(faulty[0])
        if not 0 <= idx < len(ds):
            raise ConfigurationError(f"ses.sample: {idx} out of range for {len(ds)} samples")
        model_path = Path(v["model.path"])
        if model_path.is_file():
            model = load_checkpoint(model_path)
        else:
            model = make_model(ds.graph, ds.x.shape[2], ds.n_classes, train_config(v))
        results = feature_ses_report(model, ds.sample(idx), v["ses.node"], fs)
        target = v["ses.target_hz"] if v["ses.target_hz"] >= 0 else ds.metadata["fault_hz"][ds.labels[idx]]
    freqs = results[0].freqs
    rows = [{"freq_hz": float(f), **{r.source: float(r.magnitude[i]) for r in results}} for i, f in enumerate(freqs)]
    out = [write_csv(run.out_dir / "ses.csv", rows, ["freq_hz"] + [r.source for r in results])]
    peaks = []
    for r in results:
        k = int(np.argmax(r.magnitude))
        row = {"source": r.source, "peak_hz": float(r.freqs[k]), "magnitude": float(r.magnitude[k])}
        if target > 0:
            rep = locate_fault_frequency(r, target)
            row.update(target_hz=target, located=rep.located, prominence=rep.prominence)
        peaks.append(row)
    out.append(write_csv(run.out_dir / "ses_peaks.csv", peaks,
                         ["source", "peak_hz", "magnitude", "target_hz", "located", "prominence"]))
    if v["plot"]:
        out.append(line_plot(run.out_dir / "ses.svg", [(r.source, r.freqs, r.magnitude) for r in results],
                             "frequency (Hz)", "SES magnitude", "squared envelope spectrum"))
    return out


def cmd_depth_sweep(run: RunConfig) -> list:
    ds = _load_dataset(run)
    rows = depth_sweep(ds, run["sweep.depths"], train_config(run.values), jobs=run["jobs"])
    out = [write_csv(run.out_dir / "depth_sweep.csv", rows, ["model", "depth", "test_acc", "train_loss"]),
           write_json(run.out_dir / "depth_sweep.json", _sidecar(run, "sweep"))]
    if run["plot"]:
        series = [(kind, [r["depth"] for r in rows if r["model"] == kind], [r["test_acc"] for r in rows if r["model"] == kind])
                  for kind in ("sgwn", "lowpass")]
        out.append(line_plot(run.out_dir / "depth_sweep.svg", series, "depth", "test accuracy", "depth sweep"))
    return out


def cmd_hyper_sweep(run: RunConfig):
    ds = _load_dataset(run)
    rows, timings = hyperparam_sweep(ds, run["sweep.J_values"], run["sweep.K_values"], train_config(run.values),
                                     repeats=run["sweep.repeats"], jobs=run["jobs"])
    out = [write_csv(run.out_dir / "hyper_sweep.csv", rows, ["J", "K", "test_acc", "train_loss"]),
           write_json(run.out_dir / "hyper_sweep.json", _sidecar(run, "sweep"))]
    timing = write_csv(run.out_dir / "hyper_sweep_timing.csv", timings, ["J", "K", "wall_time_s"])
    return out, [timing]


def cmd_noise_sweep(run: RunConfig) -> list:
    ds = _load_dataset(run)
    rows = noise_sweep(ds, run["sweep.snr"], train_config(run.values), jobs=run["jobs"])
    return [write_csv(run.out_dir / "noise_sweep.csv", rows, ["snr_db", "test_acc", "train_loss"]),
            write_json(run.out_dir / "noise_sweep.json", _sidecar(run, "sweep"))]


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "filters": cmd_filters,
    "transform": cmd_transform,
    "ses": cmd_ses,
    "depth-sweep": cmd_depth_sweep,
    "hyper-sweep": cmd_hyper_sweep,
    "noise-sweep": cmd_noise_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgwn", description="Spectral graph wavelet network experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat TOML config file")
        p.add_argument("--out", help="output directory (created if absent)")
        p.add_argument("--seed", type=int)
        p.add_argument("overrides", nargs="*", metavar="key=value")
    return parser


def run_command(run: RunConfig) -> list:
    run.out_dir.mkdir(parents=True, exist_ok=True)
    produced = COMMANDS[run.command](run)
    files, volatile = produced if isinstance(produced, tuple) else (produced, [])
    manifest = write_manifest(run, [Path(p) for p in files], [Path(p) for p in volatile])
    return list(files) + list(volatile) + [manifest]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        run = load_config(args.command, args.config, args.overrides, args.out, args.seed)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    try:
        run_command(run)
    except (ConfigurationError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, FormatError) as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure in {run.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SgwnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
