"""Reverse-mode automatic differentiation over float64 numpy arrays.

A Tensor wraps one ndarray and remembers how it was produced; calling
``backward()`` on a scalar walks the tape once in reverse topological order.
The fused recurrence cell dispatches to the selected kernel backend.
"""

from __future__ import annotations

import numpy as np

from .kernels import lstm_gates_backward, lstm_gates_forward


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        if not requires_grad:
            for p in parents:
                if p.requires_grad:
                    requires_grad = True
                    break
        self.requires_grad = requires_grad
        self._parents = parents if requires_grad else ()
        self._backward = backward if requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64)
            if self.grad.shape != self.data.shape:  # scalar broadcast edge
                self.grad = np.broadcast_to(self.grad, self.data.shape).copy()
        else:
            self.grad += grad

    def _accumulate_at(self, key, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        np.add.at(self.grad, key, grad)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        if self.data.ndim != 0:
            raise ValueError("backward() starts from a scalar")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'set' if self.grad is not None else 'none'})"


def constant(data) -> Tensor:
    return Tensor(data)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad, b.data.shape))

    return Tensor(out_data, parents=(a, b), backward=backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad * a.data, b.data.shape))

    return Tensor(out_data, parents=(a, b), backward=backward)


def scale(a: Tensor, factor: float) -> Tensor:
    def backward(grad):
        a._accumulate(grad * factor)

    return Tensor(a.data * factor, parents=(a,), backward=backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data @ b.data

    def backward(grad):
        if a.requires_grad:
            if a.data.ndim == 1 and b.data.ndim == 2:
                a._accumulate(b.data @ grad)
            elif a.data.ndim == 2 and b.data.ndim == 1:
                a._accumulate(np.outer(grad, b.data))
            else:
                a._accumulate(grad @ b.data.T)
        if b.requires_grad:
            if a.data.ndim == 1 and b.data.ndim == 2:
                b._accumulate(np.outer(a.data, grad))
            elif a.data.ndim == 2 and b.data.ndim == 1:
                b._accumulate(a.data.T @ grad)
            else:
                b._accumulate(a.data.T @ grad)

    return Tensor(out_data, parents=(a, b), backward=backward)


def take(a: Tensor, key) -> Tensor:
    out_data = a.data[key]

    def backward(grad):
        a._accumulate_at(key, grad)

    return Tensor(out_data, parents=(a,), backward=backward)


def gather_rows(table: Tensor, indices) -> Tensor:
    idx = np.asarray(indices, dtype=np.intp)
    out_data = table.data[idx]

    def backward(grad):
        table._accumulate_at(idx, grad)

    return Tensor(out_data, parents=(table,), backward=backward)


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(grad):
        for t, start, stop in zip(tensors, offsets, offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * grad.ndim
                sl[axis] = slice(start, stop)
                t._accumulate(grad[tuple(sl)])

    return Tensor(out_data, parents=tuple(tensors), backward=backward)


def stack_rows(tensors: list[Tensor]) -> Tensor:
    out_data = np.stack([t.data for t in tensors])

    def backward(grad):
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t._accumulate(grad[i])

    return Tensor(out_data, parents=tuple(tensors), backward=backward)


def repeat_row(row: Tensor, count: int) -> Tensor:
    out_data = np.tile(row.data, (count, 1))

    def backward(grad):
        row._accumulate(grad.sum(axis=0))

    return Tensor(out_data, parents=(row,), backward=backward)


def reshape(a: Tensor, shape) -> Tensor:
    out_data = a.data.reshape(shape)

    def backward(grad):
        a._accumulate(grad.reshape(a.data.shape))

    return Tensor(out_data, parents=(a,), backward=backward)


def tanh(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def backward(grad):
        a._accumulate(grad * (1.0 - out_data * out_data))

    return Tensor(out_data, parents=(a,), backward=backward)


def mean(a: Tensor) -> Tensor:
    out_data = np.asarray(a.data.mean())
    n = a.data.size

    def backward(grad):
        a._accumulate(np.full_like(a.data, grad / n))

    return Tensor(out_data, parents=(a,), backward=backward)


def mean_rows(a: Tensor) -> Tensor:
    """Mean over axis 0 of a 2-D tensor."""
    out_data = a.data.mean(axis=0)
    n = a.data.shape[0]

    def backward(grad):
        a._accumulate(np.tile(grad / n, (n, 1)))

    return Tensor(out_data, parents=(a,), backward=backward)


def add_scalars(tensors: list[Tensor]) -> Tensor:
    out_data = np.asarray(sum(t.data for t in tensors))

    def backward(grad):
        for t in tensors:
            if t.requires_grad:
                t._accumulate(grad)

    return Tensor(out_data, parents=tuple(tensors), backward=backward)


def masked_softmax(scores: Tensor, mask: np.ndarray) -> Tensor:
    """Softmax over positions where mask is True; zero probability elsewhere."""
    data = np.where(mask, scores.data, -np.inf)
    shifted = data - data.max()
    exp = np.exp(shifted)
    out_data = exp / exp.sum()

    def backward(grad):
        dot = float((grad * out_data).sum())
        scores._accumulate(out_data * (grad - dot))

    return Tensor(out_data, parents=(scores,), backward=backward)


def log_softmax(logits: Tensor) -> Tensor:
    shifted = logits.data - logits.data.max()
    log_z = np.log(np.exp(shifted).sum())
    out_data = shifted - log_z

    def backward(grad):
        softmax = np.exp(out_data)
        logits._accumulate(grad - softmax * grad.sum())

    return Tensor(out_data, parents=(logits,), backward=backward)


def logsumexp(a: Tensor) -> Tensor:
    m = a.data.max()
    out_data = np.asarray(m + np.log(np.exp(a.data - m).sum()))

    def backward(grad):
        a._accumulate(grad * np.exp(a.data - out_data))

    return Tensor(out_data, parents=(a,), backward=backward)


def grouped_logsumexp(scores: Tensor, groups: list) -> Tensor:
    """log-sum-exp of ``scores`` over each index group, as one (G,) tensor."""
    out_data = np.empty(len(groups))
    for g, idx in enumerate(groups):
        vals = scores.data[idx]
        m = vals.max()
        out_data[g] = m + np.log(np.exp(vals - m).sum())

    def backward(grad):
        full = np.zeros_like(scores.data)
        for g, idx in enumerate(groups):
            full[idx] += grad[g] * np.exp(scores.data[idx] - out_data[g])
        scores._accumulate(full)

    return Tensor(out_data, parents=(scores,), backward=backward)


def transpose(a: Tensor) -> Tensor:
    def backward(grad):
        a._accumulate(grad.T)

    return Tensor(a.data.T, parents=(a,), backward=backward)


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, w: Tensor, u: Tensor, b: Tensor):
    """One fused recurrence step; returns (h, c) as a single tape node plus views."""
    preact_data = x.data @ w.data + h_prev.data @ u.data + b.data
    hc_data, cache = lstm_gates_forward(preact_data, c_prev.data)

    def backward(grad_hc):
        dpreact, dc_prev = lstm_gates_backward(cache, grad_hc)
        if x.requires_grad:
            x._accumulate(w.data @ dpreact)
        if h_prev.requires_grad:
            h_prev._accumulate(u.data @ dpreact)
        if c_prev.requires_grad:
            c_prev._accumulate(dc_prev)
        if w.requires_grad:
            if w.grad is None:
                w.grad = np.zeros_like(w.data)
            w.grad += x.data[:, None] * dpreact
        if u.requires_grad:
            if u.grad is None:
                u.grad = np.zeros_like(u.data)
            u.grad += h_prev.data[:, None] * dpreact
        if b.requires_grad:
            b._accumulate(dpreact)

    hc = Tensor(hc_data, parents=(x, h_prev, c_prev, w, u, b), backward=backward)
    return hc[0], hc[1]


def lstm_sequence(inputs: Tensor, w: Tensor, u: Tensor, b: Tensor, reverse: bool = False):
    """Run a full recurrence over the rows of ``inputs`` as one tape node.

    Returns a (2, n, hidden) tensor of per-token hidden states and cell
    memories, in original token order; ``reverse`` consumes tokens right to
    left. The backward pass replays the sequence once.
    """
    x_data = inputs.data
    n = x_data.shape[0]
    hidden = u.data.shape[0]
    order = range(n - 1, -1, -1) if reverse else range(n)
    preacts = x_data @ w.data + b.data  # (n, 4*hidden)
    states = np.empty((2, n, hidden))
    caches = [None] * n
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    for j in order:
        hc, cache = lstm_gates_forward(preacts[j] + h @ u.data, c)
        h, c = hc[0], hc[1]
        states[0, j] = h
        states[1, j] = c
        caches[j] = cache

    def backward(grad):
        dh = np.zeros(hidden)
        dc = np.zeros(hidden)
        dpre = np.empty((n, 4 * hidden))
        du = np.zeros_like(u.data)
        ghc = np.empty((2, hidden))
        for j in reversed(list(order)):
            ghc[0] = grad[0, j] + dh
            ghc[1] = grad[1, j] + dc
            dpre[j], dc = lstm_gates_backward(caches[j], ghc)
            prev_j = j - 1 if not reverse else j + 1
            if (not reverse and j > 0) or (reverse and j < n - 1):
                h_prev = states[0, prev_j]
            else:
                h_prev = np.zeros(hidden)
            if u.requires_grad:
                du += np.outer(h_prev, dpre[j])
            dh = u.data @ dpre[j]
        if inputs.requires_grad:
            inputs._accumulate(dpre @ w.data.T)
        if w.requires_grad:
            w._accumulate(x_data.T @ dpre)
        if u.requires_grad:
            u._accumulate(du)
        if b.requires_grad:
            b._accumulate(dpre.sum(axis=0))

    return Tensor(states, parents=(inputs, w, u, b), backward=backward)


def dropout(a: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when p == 0."""
    if p <= 0.0:
        return a
    keep = (rng.random(a.data.shape) >= p) / (1.0 - p)
    return mul(a, Tensor(keep))
