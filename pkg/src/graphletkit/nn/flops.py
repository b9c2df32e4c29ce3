"""Floating-point operation accounting for the count regressor.

Convention "flops-v1": a multiply-accumulate is 2 FLOPs (the accumulator
starts at zero, so every product incurs one add), each bias add is 1, and
ReLU is free. Per conv layer that is ``out^2 * C_out * (2 * H^2 * C_in)``
plus ``out^2 * C_out`` bias adds; the dense readout costs ``2 * L + 1``.
The count depends on shapes only, never on weight values.

`instrumented_forward` replays the forward pass with naive Python loops,
tallying every multiply and add as it happens; its tally must equal
`flops(model).total` exactly, which the acceptance suite checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CnnModel, _as_batch

FLOPS_CONVENTION = "flops-v1"


@dataclass(frozen=True)
class FlopsReport:
    per_layer: dict[str, int]
    total: int
    convention: str = FLOPS_CONVENTION

    def to_dict(self) -> dict:
        return {
            "per_layer": dict(self.per_layer),
            "total": self.total,
            "convention": self.convention,
        }


def flops(model: CnnModel) -> FlopsReport:
    """FLOPs of one forward pass under the flops-v1 convention."""
    side1, side2 = model.feature_sides
    h1, h2 = model.filter_sizes
    c1, c2 = model.channels
    conv1 = side1 * side1 * c1 * (2 * h1 * h1 * 1) + side1 * side1 * c1
    conv2 = side2 * side2 * c2 * (2 * h2 * h2 * c1) + side2 * side2 * c2
    flat_len = side2 * side2 * c2
    dense = 2 * flat_len + 1
    per_layer = {"conv1": conv1, "conv2": conv2, "dense": dense}
    return FlopsReport(per_layer, conv1 + conv2 + dense)


def instrumented_forward(model: CnnModel, x) -> tuple[float, int]:
    """Naive forward pass that counts each multiply and add as performed.

    Returns ``(normalized prediction, tally)``. Slow by design; intended for
    verifying the closed-form FLOPs report on small shapes.
    """
    arr = _as_batch(model, x)[0].astype(np.float64)
    tally = 0

    def conv(inp, layer):
        nonlocal tally
        h = layer.filter_size
        out_side = inp.shape[0] - h + 1
        w = layer.weights.astype(np.float64)
        b = layer.bias.astype(np.float64)
        out = np.zeros((out_side, out_side, layer.out_channels))
        for t in range(layer.out_channels):
            for i in range(out_side):
                for j in range(out_side):
                    acc = 0.0
                    for di in range(h):
                        for dj in range(h):
                            for c in range(layer.in_channels):
                                acc += w[di, dj, c, t] * inp[i + di, j + dj, c]
                                tally += 2  # one multiply, one accumulate
                    acc += b[t]
                    tally += 1
                    out[i, j, t] = max(0.0, acc)  # ReLU not counted
        return out

    a1 = conv(arr, model.conv1)
    a2 = conv(a1, model.conv2)

    flat = a2.reshape(-1)
    w3 = model.dense.weights.astype(np.float64).reshape(-1)
    acc = 0.0
    for i in range(flat.shape[0]):
        acc += flat[i] * w3[i]
        tally += 2
    acc += float(model.dense.bias[0])
    tally += 1
    if model.final_relu:
        acc = max(0.0, acc)
    return acc, tally
