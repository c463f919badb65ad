"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

import numpy as np

from ..neural.params import ModelParameters


class Adam:
    def __init__(self, params: ModelParameters, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {n: np.zeros_like(t.data) for n, t in params.tensors.items()}
        self.v = {n: np.zeros_like(t.data) for n, t in params.tensors.items()}
        self.t = 0

    def step(self, lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, tensor in self.params.tensors.items():
            if tensor.grad is None:
                continue
            g = tensor.grad
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1 ** self.t)
            v_hat = self.v[name] / (1 - b2 ** self.t)
            tensor.data -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
