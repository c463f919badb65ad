"""Pure-numpy recurrence-gate kernels (fallback backend).

The fused cell takes pre-activations split as [input, forget, cell, output]
gates and the previous cell memory, and returns the stacked (hidden, cell)
pair plus the cache needed for the backward pass.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_gates_forward(preact: np.ndarray, c_prev: np.ndarray):
    hidden = c_prev.shape[0]
    i = _sigmoid(preact[:hidden])
    f = _sigmoid(preact[hidden : 2 * hidden])
    g = np.tanh(preact[2 * hidden : 3 * hidden])
    o = _sigmoid(preact[3 * hidden :])
    c = i * g + f * c_prev
    tanh_c = np.tanh(c)
    h = o * tanh_c
    hc = np.stack([h, c])
    return hc, (i, f, g, o, tanh_c, c_prev)


def lstm_gates_backward(cache, grad_hc: np.ndarray):
    i, f, g, o, tanh_c, c_prev = cache
    dh, dc = grad_hc[0], grad_hc[1].copy()
    dc += dh * o * (1.0 - tanh_c * tanh_c)
    d_i = dc * g * i * (1.0 - i)
    d_f = dc * c_prev * f * (1.0 - f)
    d_g = dc * i * (1.0 - g * g)
    d_o = dh * tanh_c * o * (1.0 - o)
    dpreact = np.concatenate([d_i, d_f, d_g, d_o])
    dc_prev = dc * f
    return dpreact, dc_prev
