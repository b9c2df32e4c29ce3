"""Minimal CNN engine: two valid convolutions and one dense readout.

Implements exactly the count-regression architecture used by the training
harness, with reverse-mode gradients, an Adam optimizer, floating-point
operation accounting, and lossless weight serialization.
"""

from .layers import ConvLayer, DenseLayer, conv_forward, dense_forward
from .model import (
    CnnModel,
    backward,
    build_model,
    forward,
    forward_batch,
    load_model,
    mse_loss,
    save_model,
)
from .optim import Adam, optimizer_step
from .flops import FLOPS_CONVENTION, FlopsReport, flops, instrumented_forward

__all__ = [
    "Adam",
    "CnnModel",
    "ConvLayer",
    "DenseLayer",
    "FLOPS_CONVENTION",
    "FlopsReport",
    "backward",
    "build_model",
    "conv_forward",
    "dense_forward",
    "flops",
    "forward",
    "forward_batch",
    "instrumented_forward",
    "load_model",
    "mse_loss",
    "optimizer_step",
    "save_model",
]
