"""SGWN checkpoints: ``b"SGWN"`` container holding config, graph and parameter arrays."""

from __future__ import annotations

from dataclasses import asdict

from ..binfmt import read_container, write_container
from ..errors import FormatError
from ..graph import Graph
from .model import ModelConfig, SgwnModel

MAGIC = b"SGWN"


def save_checkpoint(model: SgwnModel, path) -> int:
    header = {
        "model": "sgwn",
        "config": asdict(model.config),
        "graph": model.graph.to_dict(),
        "d": model.d,
        "n_classes": model.n_classes,
        "lambda_max": model.laplacian.lambda_max,
    }
    arrays = list(model.parameters().items()) + list(model.buffers().items())
    return write_container(path, MAGIC, header, arrays)


def load_checkpoint(path) -> SgwnModel:
    header, arrays = read_container(path, MAGIC)
    if header.get("model") != "sgwn":
        raise FormatError(f"unsupported model kind {header.get('model')!r}")
    model = SgwnModel(Graph.from_dict(header["graph"]), header["d"], header["n_classes"], ModelConfig(**header["config"]))
    try:
        model.set_state(arrays)
    except (KeyError, ValueError) as exc:
        raise FormatError(f"checkpoint arrays do not match the model: {exc}") from None
    return model
