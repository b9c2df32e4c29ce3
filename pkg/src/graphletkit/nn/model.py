"""The two-conv one-dense count regressor: assembly, gradients, serialization."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..exceptions import (
    CorruptPayloadError,
    EmptyBatchError,
    LengthMismatchError,
    ShapeMismatchError,
    VersionMismatchError,
)
from ..graphs import PaddedMatrix
from ..rng import generator
from .layers import (
    ConvLayer,
    DenseLayer,
    conv_backward_batch,
    conv_forward_batch,
    dense_forward_batch,
)

MODEL_FORMAT_VERSION = 1
FLATTEN_ORDER = "row-major height,width,channel"

_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass
class CnnModel:
    """Two valid convolutions and a dense scalar readout.

    ``target_scale`` is the factor training divided the raw counts by;
    inference multiplies it back so predictions are counts. ``final_relu``
    keeps the readout nonnegative and is on by default.
    """

    conv1: ConvLayer
    conv2: ConvLayer
    dense: DenseLayer
    input_dim: int
    target_scale: float = 1.0
    final_relu: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        side1 = self.input_dim - self.conv1.filter_size + 1
        side2 = side1 - self.conv2.filter_size + 1
        if side1 < 1 or side2 < 1:
            raise ShapeMismatchError(
                f"filters {self.filter_sizes} too large for input {self.input_dim}"
            )
        if self.conv1.in_channels != 1:
            raise ShapeMismatchError("first conv layer must take 1 input channel")
        if self.conv2.in_channels != self.conv1.out_channels:
            raise ShapeMismatchError("conv2 input channels must equal conv1 output channels")
        expected = side2 * side2 * self.conv2.out_channels
        if self.dense.input_len != expected:
            raise ShapeMismatchError(
                f"dense layer expects {self.dense.input_len} inputs, shape chain gives {expected}"
            )
        if self.target_scale <= 0:
            raise ValueError("target_scale must be positive")

    @property
    def filter_sizes(self) -> tuple[int, int]:
        return (self.conv1.filter_size, self.conv2.filter_size)

    @property
    def channels(self) -> tuple[int, int]:
        return (self.conv1.out_channels, self.conv2.out_channels)

    @property
    def feature_sides(self) -> tuple[int, int]:
        side1 = self.input_dim - self.conv1.filter_size + 1
        return side1, side1 - self.conv2.filter_size + 1

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            "conv1.weights": self.conv1.weights,
            "conv1.bias": self.conv1.bias,
            "conv2.weights": self.conv2.weights,
            "conv2.bias": self.conv2.bias,
            "dense.weights": self.dense.weights,
            "dense.bias": self.dense.bias,
        }


def build_model(
    input_dim: int,
    filter_sizes: tuple[int, int] = (5, 5),
    channels: tuple[int, int] = (8, 16),
    seed: int = 0,
    dtype: str = "float32",
    final_relu: bool = True,
    target_scale: float = 1.0,
) -> CnnModel:
    """Initialize weights fan-in-scaled uniform (+-sqrt(6/fan_in)), biases zero."""
    if dtype not in _DTYPES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPES)}, got {dtype!r}")
    np_dtype = _DTYPES[dtype]
    rng = generator(seed, "init")
    h1, h2 = filter_sizes
    c1, c2 = channels

    def uniform(shape, fan_in):
        bound = np.sqrt(6.0 / fan_in)
        return rng.uniform(-bound, bound, size=shape).astype(np_dtype)

    side2 = input_dim - h1 - h2 + 2
    flat_len = side2 * side2 * c2
    conv1 = ConvLayer(uniform((h1, h1, 1, c1), h1 * h1), np.zeros(c1, dtype=np_dtype))
    conv2 = ConvLayer(uniform((h2, h2, c1, c2), h2 * h2 * c1), np.zeros(c2, dtype=np_dtype))
    dense = DenseLayer(uniform((flat_len, 1), flat_len), np.zeros(1, dtype=np_dtype))
    return CnnModel(
        conv1, conv2, dense, input_dim,
        target_scale=target_scale, final_relu=final_relu, dtype=dtype,
    )


def _as_batch(model: CnnModel, x) -> np.ndarray:
    arr = x.values if isinstance(x, PaddedMatrix) else np.asarray(x)
    if arr.ndim == 2:
        arr = arr[None, :, :, None]
    elif arr.ndim == 3:
        arr = arr[None] if arr.shape[2] == 1 else arr[:, :, :, None]
    if arr.ndim != 4 or arr.shape[3] != 1:
        raise ShapeMismatchError(f"cannot interpret input of shape {np.asarray(x).shape}")
    if arr.shape[1] != model.input_dim or arr.shape[2] != model.input_dim:
        raise ShapeMismatchError(
            f"input side {arr.shape[1]} does not match model input_dim {model.input_dim}"
        )
    return arr.astype(_DTYPES[model.dtype], copy=False)


def forward_batch(model: CnnModel, x: np.ndarray) -> np.ndarray:
    """Normalized-scale predictions for a batch; pure, no parameter mutation."""
    x = _as_batch(model, x)
    a1, _, _ = conv_forward_batch(x, model.conv1)
    a2, _, _ = conv_forward_batch(a1, model.conv2)
    out, _, _ = dense_forward_batch(a2, model.dense, relu=model.final_relu)
    return out


def forward(model: CnnModel, x) -> float:
    """Predicted count for one padded matrix (target scaling undone)."""
    return float(forward_batch(model, x)[0] * model.target_scale)


def mse_loss(preds, targets) -> float:
    """Mean squared error between two equal-length nonempty sequences."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise LengthMismatchError(
            f"predictions and targets differ in shape: {preds.shape} vs {targets.shape}"
        )
    if preds.size == 0:
        raise EmptyBatchError("mse_loss needs at least one pair")
    return float(np.mean((preds - targets) ** 2))


def backward(model: CnnModel, x: np.ndarray, targets: np.ndarray):
    """Loss and gradients of the batch MSE w.r.t. every parameter.

    ``targets`` are on the normalized scale (already divided by
    target_scale). Returns ``(loss, grads)`` with grads keyed like
    :meth:`CnnModel.parameters`.
    """
    x = _as_batch(model, x)
    targets = np.asarray(targets, dtype=x.dtype)
    b = x.shape[0]
    if b == 0:
        raise EmptyBatchError("backward needs a nonempty batch")
    if targets.shape != (b,):
        raise LengthMismatchError(f"targets shape {targets.shape} does not match batch {b}")

    a1, mask1, cols1 = conv_forward_batch(x, model.conv1)
    a2, mask2, cols2 = conv_forward_batch(a1, model.conv2)
    preds, mask3, flat = dense_forward_batch(a2, model.dense, relu=model.final_relu)

    diff = preds - targets
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    dpred = (2.0 / b) * diff
    dz3 = np.where(mask3, dpred, 0.0).reshape(b, 1)

    dw3 = flat.T @ dz3
    db3 = dz3.sum(axis=0)
    dflat = dz3 @ model.dense.weights.T
    da2 = dflat.reshape(a2.shape)

    dz2 = np.where(mask2, da2, 0.0)
    dw2, db2, da1 = conv_backward_batch(dz2, cols2, model.conv2, a1.shape[1])
    dz1 = np.where(mask1, da1, 0.0)
    dw1, db1, _ = conv_backward_batch(dz1, cols1, model.conv1, x.shape[1])

    grads = {
        "conv1.weights": dw1,
        "conv1.bias": db1,
        "conv2.weights": dw2,
        "conv2.bias": db2,
        "dense.weights": dw3,
        "dense.bias": db3,
    }
    return loss, grads


def save_model(model: CnnModel, path) -> None:
    """Write a lossless single-file JSON snapshot of the model.

    Weights are little-endian IEEE-754 bytes, base64-encoded, one payload
    per parameter tensor.
    """
    byte_order = "<f4" if model.dtype == "float32" else "<f8"
    tensors = {}
    for name, arr in model.parameters().items():
        tensors[name] = {
            "shape": list(arr.shape),
            "data": base64.b64encode(np.ascontiguousarray(arr, dtype=byte_order).tobytes()).decode("ascii"),
        }
    doc = {
        "format": "graphletkit-model",
        "format_version": MODEL_FORMAT_VERSION,
        "dtype": model.dtype,
        "input_dim": model.input_dim,
        "filter_sizes": list(model.filter_sizes),
        "channels": list(model.channels),
        "target_scale": model.target_scale,
        "final_relu": model.final_relu,
        "flatten_order": FLATTEN_ORDER,
        "tensors": tensors,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path) -> CnnModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: model format version {version!r}, supported {MODEL_FORMAT_VERSION}"
        )
    dtype = doc["dtype"]
    if dtype not in _DTYPES:
        raise CorruptPayloadError(f"{path}: unknown dtype {dtype!r}")
    byte_order = "<f4" if dtype == "float32" else "<f8"
    itemsize = 4 if dtype == "float32" else 8

    def tensor(name: str) -> np.ndarray:
        entry = doc["tensors"][name]
        shape = tuple(entry["shape"])
        try:
            raw = base64.b64decode(entry["data"], validate=True)
        except Exception as exc:
            raise CorruptPayloadError(f"{path}: tensor {name}: bad base64") from exc
        expected = int(np.prod(shape)) * itemsize
        if len(raw) != expected:
            raise CorruptPayloadError(
                f"{path}: tensor {name}: {len(raw)} bytes, expected {expected}"
            )
        return np.frombuffer(raw, dtype=byte_order).reshape(shape).astype(_DTYPES[dtype])

    try:
        conv1 = ConvLayer(tensor("conv1.weights"), tensor("conv1.bias"))
        conv2 = ConvLayer(tensor("conv2.weights"), tensor("conv2.bias"))
        dense = DenseLayer(tensor("dense.weights"), tensor("dense.bias"))
        return CnnModel(
            conv1,
            conv2,
            dense,
            input_dim=int(doc["input_dim"]),
            target_scale=float(doc["target_scale"]),
            final_relu=bool(doc["final_relu"]),
            dtype=dtype,
        )
    except KeyError as exc:
        raise CorruptPayloadError(f"{path}: missing field {exc}") from exc
