"""SGWConv layers, the SGWN classifier and its training loop."""

from .checkpoint import load_checkpoint, save_checkpoint
from .layers import BatchNorm, DenseHead, SgwConvLayer, readout, softmax
from .model import (
    LowpassBaseline,
    ModelConfig,
    SgwnModel,
    backward,
    classify,
    cross_entropy,
    lowpass_baseline_forward,
    propagation_matrix,
    sgwconv_forward,
)
from .train import EvalResult, TrainConfig, evaluate, make_model, train

__all__ = [
    "BatchNorm",
    "DenseHead",
    "EvalResult",
    "LowpassBaseline",
    "ModelConfig",
    "SgwConvLayer",
    "SgwnModel",
    "TrainConfig",
    "backward",
    "classify",
    "cross_entropy",
    "evaluate",
    "load_checkpoint",
    "lowpass_baseline_forward",
    "make_model",
    "propagation_matrix",
    "readout",
    "save_checkpoint",
    "sgwconv_forward",
    "softmax",
    "train",
]
