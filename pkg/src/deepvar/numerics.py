"""Float64 tensors with reverse-mode differentiation.

Every operation returns a new :class:`Tensor` that remembers its inputs and a
closure mapping the output gradient to input gradients. :func:`backward`
orders the graph topologically (a :class:`ComputationRecord`) and replays it
once in reverse. Tensors that do not require gradients are never recorded,
so constants (masks, one-hot inputs, frozen embeddings) cost nothing on the
way back.
"""

from __future__ import annotations

import zlib
from typing import Callable, Iterable, Sequence

import numpy as np

DTYPE = np.float64


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, _parents: tuple = (), _backward=None, op: str = ""):
        self.data = np.asarray(data, dtype=DTYPE)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward
        self.op = op

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op or 'leaf'})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    @property
    def T(self):
        return transpose(self)


class Parameter(Tensor):
    """A named leaf tensor; ``trainable`` decides whether it collects gradients."""

    __slots__ = ("name", "trainable")

    def __init__(self, name: str, data, trainable: bool = True):
        super().__init__(np.array(data, dtype=DTYPE), requires_grad=trainable)
        self.name = name
        self.trainable = trainable
        self.grad = np.zeros_like(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape}, trainable={self.trainable})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents: Sequence[Tensor], backward: Callable, op: str) -> Tensor:
    if any(p.requires_grad for p in parents):
        return Tensor(data, True, tuple(parents), backward, op)
    return Tensor(data, op=op)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ValueError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# -- elementwise arithmetic ---------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)
    return _make(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)
    return _make(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)), "sub")


def mul(a, b) -> Tensor:
    """Elementwise (Hadamard) product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)
    return _make(a.data * b.data, (a, b),
                 lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)), "mul")


elementwise_mul = mul


def exp(x) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.data)
    return _make(out, (x,), lambda g: (g * out,), "exp")


def log(x) -> Tensor:
    x = as_tensor(x)
    return _make(np.log(x.data), (x,), lambda g: (g / x.data,), "log")


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    z = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return _make(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return _make(out, (x,), lambda g: (g * (1.0 - out * out),), "tanh")


def select(mask, a, b) -> Tensor:
    """``a`` where ``mask`` else ``b`` (mask is a constant boolean array)."""
    a, b = as_tensor(a), as_tensor(b)
    mask = np.asarray(mask, dtype=bool)
    out = np.where(mask, a.data, b.data)

    def back(g):
        return (_unbroadcast(np.where(mask, g, 0.0), a.shape), _unbroadcast(np.where(mask, 0.0, g), b.shape))

    return _make(out, (a, b), back, "select")


# -- linear algebra and shape ------------------------------------------------


def matmul(a, b) -> Tensor:
    """Matrix product; ``a`` may carry leading batch dimensions, ``b`` is 1-D or 2-D."""
    a, b = as_tensor(a), as_tensor(b)
    if b.ndim > 2 or a.ndim < 1 or b.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise ValueError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = a.data @ b.data

    def back(g):
        ad, bd = a.data, b.data
        if bd.ndim == 1:
            ga = np.multiply.outer(g, bd) if a.requires_grad else None
            gb = np.tensordot(ad, g, axes=(tuple(range(ad.ndim - 1)), tuple(range(g.ndim)))) if b.requires_grad else None
            return ga, gb
        if ad.ndim == 1:
            ga = bd @ g if a.requires_grad else None
            gb = np.outer(ad, g) if b.requires_grad else None
            return ga, gb
        ga = g @ bd.T if a.requires_grad else None
        gb = None
        if b.requires_grad:
            a2 = ad.reshape(-1, ad.shape[-1])
            gb = a2.T @ g.reshape(-1, g.shape[-1])
        return ga, gb

    return _make(out, (a, b), back, "matmul")


def transpose(x) -> Tensor:
    x = as_tensor(x)
    return _make(x.data.T, (x,), lambda g: (g.T,), "transpose")


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    old = x.shape
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ValueError(f"reshape: cannot reshape {old} to {tuple(shape)}") from None
    return _make(out, (x,), lambda g: (g.reshape(old),), "reshape")


def _has_advanced(idx) -> bool:
    items = idx if isinstance(idx, tuple) else (idx,)
    return any(isinstance(i, (list, np.ndarray)) for i in items)


def getitem(x, idx) -> Tensor:
    x = as_tensor(x)
    out = x.data[idx]
    advanced = _has_advanced(idx)

    def back(g):
        full = np.zeros_like(x.data)
        if advanced:
            np.add.at(full, idx, g)
        else:
            full[idx] = g
        return (full,)

    return _make(out, (x,), back, "getitem")


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("concat: no operands")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ValueError(f"concat: incompatible shapes {[t.shape for t in tensors]} on axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _make(out, tensors, lambda g: tuple(np.split(g, bounds, axis=axis)), "concat")


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if len({t.shape for t in tensors}) > 1:
        raise ValueError(f"stack: shapes differ {[t.shape for t in tensors]}")
    out = np.stack([t.data for t in tensors], axis=axis)

    def back(g):
        return tuple(np.moveaxis(g, axis, 0))

    return _make(out, tensors, back, "stack")


def sum(x, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001 - mirrors numpy
    x = as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _make(out, (x,), back, "sum")


def mean(x, axis=None) -> Tensor:
    x = as_tensor(x)
    n = x.data.size if axis is None else x.shape[axis]
    return mul(sum(x, axis), 1.0 / n)


# -- reductions ------------------------------------------------------------------


def log_sum_exp(x, axis: int = -1) -> Tensor:
    """Max-shifted ``log(sum(exp(x)))`` along ``axis``."""
    x = as_tensor(x)
    if x.data.size == 0 or x.shape[axis] == 0:
        raise ValueError("log_sum_exp: empty input")
    m = np.max(x.data, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.exp(x.data - m)
    tot = s.sum(axis=axis, keepdims=True)
    out_k = m + np.log(tot)
    out = np.squeeze(out_k, axis=axis)

    def back(g):
        return (np.expand_dims(g, axis) * (s / tot),)

    return _make(out, (x,), back, "log_sum_exp")


def max_pool_over_time(x, mask=None) -> Tensor:
    """Columnwise max over the second-to-last (time) axis.

    ``x`` is ``(..., N, d)``; an optional boolean ``mask`` of shape ``(..., N)``
    excludes positions. Gradients go to the first maximising position.
    """
    x = as_tensor(x)
    if x.ndim < 2 or x.shape[-2] == 0:
        raise ValueError(f"max_pool_over_time: need at least one row, got shape {x.shape}")
    vals = x.data
    if mask is not None:
        vals = np.where(np.asarray(mask, dtype=bool)[..., None], vals, -np.inf)
    arg = np.argmax(vals, axis=-2)[..., None, :]
    out = np.take_along_axis(x.data, arg, axis=-2)[..., 0, :]

    def back(g):
        full = np.zeros_like(x.data)
        np.put_along_axis(full, arg, g[..., None, :], axis=-2)
        return (full,)

    return _make(out, (x,), back, "max_pool")


# -- stochastic ------------------------------------------------------------------


class Rng:
    """Seedable generator that derives independent named children.

    ``Rng(7).child("dropout")`` always yields the same stream, whatever else
    has been drawn from the parent.
    """

    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed)
        self.path = tuple(path)
        entropy = [self.seed] + [zlib.crc32(p.encode("utf-8")) for p in self.path]
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def child(self, name: str) -> "Rng":
        return Rng(self.seed, self.path + (name,))

    @property
    def name(self) -> str:
        return "/".join(self.path) or "root"

    def random(self, shape):
        return self.generator.random(shape)

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self.name!r})"


def dropout(x, rate: float, training: bool, rng=None) -> Tensor:
    """Inverted dropout: kept units are scaled by ``1/(1-rate)``; identity at inference."""
    if not 0 <= rate < 1:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    x = as_tensor(x)
    if not training or rate == 0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs an rng")
    gen = rng.generator if isinstance(rng, Rng) else rng
    keep = (gen.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, keep)


# -- differentiation ---------------------------------------------------------------


class ComputationRecord:
    """The graph behind an output, in topological order (inputs first)."""

    def __init__(self, nodes: list):
        self.nodes = nodes

    def __len__(self):
        return len(self.nodes)

    @classmethod
    def from_output(cls, out: Tensor) -> "ComputationRecord":
        order, visited = [], set()
        stack = [(out, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited and p.requires_grad:
                    stack.append((p, False))
        return cls(order)


def backward(loss: Tensor, record: ComputationRecord | None = None) -> ComputationRecord:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every leaf that requires it."""
    if loss.data.size != 1:
        raise ValueError(f"backward: loss must be a scalar, got shape {loss.shape}")
    if record is None:
        record = ComputationRecord.from_output(loss)
    if not loss.requires_grad:
        return record
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(record.nodes):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for p, pg in zip(node._parents, node._backward(g)):
            if pg is None or not p.requires_grad:
                continue
            k = id(p)
            grads[k] = pg if k not in grads else grads[k] + pg
    return record


def global_norm(arrays: Iterable[np.ndarray]) -> float:
    return float(np.sqrt(np.sum([np.sum(np.square(a)) for a in arrays])))


def clip_global_norm(grads: Sequence[np.ndarray], threshold: float = 1.0) -> tuple[list[np.ndarray], float]:
    """Scale all gradients jointly so their global L2 norm is at most ``threshold``."""
    if threshold <= 0:
        raise ValueError(f"clip threshold must be positive, got {threshold}")
    norm = global_norm(grads)
    if norm <= threshold or not np.isfinite(norm):
        return list(grads), norm
    scale = threshold / norm
    return [g * scale for g in grads], norm
