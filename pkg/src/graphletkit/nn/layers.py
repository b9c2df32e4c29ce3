"""Convolution and dense layers with explicit forward/backward passes.

Layout conventions: feature maps are (height, width, channels), batches are
(batch, height, width, channels), and convolution weights are
(H, H, in_channels, out_channels) so slice ``w[..., t]`` is filter t.
Convolutions are stride 1 with no spatial padding ("valid"), so the output
side is ``side - H + 1``. Flattening is row-major height, then width, then
channel. ReLU's subgradient at 0 is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ShapeMismatchError
from ..validation import check_finite


@dataclass
class ConvLayer:
    """One bank of square filters plus per-channel biases."""

    weights: np.ndarray  # (H, H, C_in, C_out)
    bias: np.ndarray  # (C_out,)

    def __post_init__(self):
        if self.weights.ndim != 4 or self.weights.shape[0] != self.weights.shape[1]:
            raise ShapeMismatchError(
                f"conv weights must be (H, H, C_in, C_out), got {self.weights.shape}"
            )
        if self.bias.shape != (self.weights.shape[3],):
            raise ShapeMismatchError(
                f"conv bias shape {self.bias.shape} does not match C_out={self.weights.shape[3]}"
            )

    @property
    def filter_size(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[2]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[3]


@dataclass
class DenseLayer:
    """Fully connected readout of the flattened feature map to one scalar."""

    weights: np.ndarray  # (flattened_len, 1)
    bias: np.ndarray  # (1,)

    def __post_init__(self):
        if self.weights.ndim != 2 or self.weights.shape[1] != 1:
            raise ShapeMismatchError(
                f"dense weights must be (flattened_len, 1), got {self.weights.shape}"
            )
        if self.bias.shape != (1,):
            raise ShapeMismatchError(f"dense bias must have shape (1,), got {self.bias.shape}")

    @property
    def input_len(self) -> int:
        return self.weights.shape[0]


def _patches(x: np.ndarray, h: int) -> np.ndarray:
    """im2col: (B, side, side, C) -> (B * out^2, h*h*C), windows in h,w,C order."""
    windows = sliding_window_view(x, (h, h), axis=(1, 2))  # (B, out, out, C, h, h)
    windows = windows.transpose(0, 1, 2, 4, 5, 3)  # (B, out, out, h, h, C)
    b, out = x.shape[0], x.shape[1] - h + 1
    return np.ascontiguousarray(windows).reshape(b * out * out, h * h * x.shape[3])


def conv_forward_batch(x: np.ndarray, layer: ConvLayer):
    """Returns (activations, pre-activation mask, patches) for the batch."""
    b, side, _, cin = x.shape
    h = layer.filter_size
    if cin != layer.in_channels:
        raise ShapeMismatchError(
            f"input has {cin} channels, layer expects {layer.in_channels}"
        )
    if side < h:
        raise ShapeMismatchError(f"input side {side} smaller than filter {h}")
    check_finite(x, "conv input")
    out = side - h + 1
    cols = _patches(x, h)
    z = cols @ layer.weights.reshape(-1, layer.out_channels)
    z += layer.bias
    z = z.reshape(b, out, out, layer.out_channels)
    mask = z > 0
    return np.where(mask, z, 0.0), mask, cols


def conv_backward_batch(dz: np.ndarray, cols: np.ndarray, layer: ConvLayer, in_side: int):
    """Gradient of a conv layer given dL/d(pre-activation).

    Returns (d_weights, d_bias, d_input) with d_input shaped like the layer's
    batch input.
    """
    b, out, _, cout = dz.shape
    h = layer.filter_size
    dz_flat = dz.reshape(b * out * out, cout)
    dw = (cols.T @ dz_flat).reshape(layer.weights.shape)
    db = dz_flat.sum(axis=0)
    dcols = dz_flat @ layer.weights.reshape(-1, cout).T
    dcols = dcols.reshape(b, out, out, h, h, layer.in_channels)
    dx = np.zeros((b, in_side, in_side, layer.in_channels), dtype=dz.dtype)
    for i in range(h):
        for j in range(h):
            dx[:, i : i + out, j : j + out, :] += dcols[:, :, :, i, j, :]
    return dw, db, dx


def dense_forward_batch(x: np.ndarray, layer: DenseLayer, relu: bool = True):
    """Returns (outputs (B,), mask, flattened inputs)."""
    b = x.shape[0]
    flat = x.reshape(b, -1)
    if flat.shape[1] != layer.input_len:
        raise ShapeMismatchError(
            f"flattened length {flat.shape[1]} does not match dense layer {layer.input_len}"
        )
    check_finite(x, "dense input")
    z = (flat @ layer.weights + layer.bias).reshape(b)
    if relu:
        mask = z > 0
        return np.where(mask, z, 0.0), mask, flat
    return z, np.ones_like(z, dtype=bool), flat


def conv_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Single-sample convolution + ReLU: (side, side, C_in) -> (out, out, C_out)."""
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected (side, side, channels), got {x.shape}")
    out, _, _ = conv_forward_batch(x[None], layer)
    return out[0]


def dense_forward(x: np.ndarray, layer: DenseLayer, relu: bool = True) -> float:
    """Single-sample dense readout: flatten, apply weights and bias, ReLU."""
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected (side, side, channels), got {x.shape}")
    out, _, _ = dense_forward_batch(x[None], layer, relu=relu)
    return float(out[0])
