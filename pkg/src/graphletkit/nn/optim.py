"""Adam parameter updates. Deterministic given the gradient sequence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import NonFiniteGradientError
from .model import CnnModel


@dataclass
class Adam:
    """Adam with bias correction; moments live per parameter name."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    _m: dict = field(default_factory=dict, repr=False)
    _v: dict = field(default_factory=dict, repr=False)

    def step(self, model: CnnModel, grads: dict) -> CnnModel:
        params = model.parameters()
        for name, g in grads.items():
            if not np.isfinite(g).all():
                raise NonFiniteGradientError(f"gradient {name} is not finite")
        self.step_count += 1
        t = self.step_count
        for name, p in params.items():
            g = grads[name].astype(p.dtype, copy=False)
            m = self._m.get(name)
            if m is None:
                m = np.zeros_like(p)
                self._m[name] = m
                self._v[name] = np.zeros_like(p)
            v = self._v[name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            m_hat = m / (1 - self.beta1**t)
            v_hat = v / (1 - self.beta2**t)
            p -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype)
        return model


def optimizer_step(model: CnnModel, grads: dict, optimizer: Adam) -> CnnModel:
    """Apply one Adam update in place; the optimizer is the single writer."""
    return optimizer.step(model, grads)
