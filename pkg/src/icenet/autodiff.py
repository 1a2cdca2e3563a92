"""Minimal reverse-mode differentiation over numpy arrays.

Every primitive returns a new :class:`Tensor` that remembers its parents and a
closure computing the parents' adjoints. :func:`backward` orders the reachable
graph into a :class:`Tape` (a deterministic topological ordering) and replays
the closures in reverse.

Gradients accumulate across repeated ``backward`` calls, the same way torch
does; call :func:`zero_grad` between steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DTYPE = np.float64


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class ContractError(RuntimeError):
    """A caller broke an operation's precondition."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self._op = "leaf"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, op={self._op}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=DTYPE, copy=True).reshape(self.shape)
        else:
            self.grad += g

    # operator sugar, all routed through the primitives below
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(as_tensor(other), self)

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(as_tensor(other), self)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data: np.ndarray, parents: Sequence[Tensor], op: str, backward_fn) -> Tensor:
    # bypasses __init__: this sits on the hot path and data is already an array
    out = object.__new__(Tensor)
    if type(data) is not np.ndarray or data.dtype != DTYPE:
        data = np.asarray(data, dtype=DTYPE)
    out.data = data
    out.grad = None
    out.name = None
    out._op = op
    for p in parents:
        if p.requires_grad:
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward_fn
            return out
    out.requires_grad = False
    out._parents = ()
    out._backward = None
    return out


@dataclass
class Tape:
    """Ordered record of the operations reachable from one output."""

    nodes: list[Tensor] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def ops(self) -> list[str]:
        return [n._op for n in self.nodes]

    @classmethod
    def record(cls, root: Tensor) -> "Tape":
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in reversed(node._parents):
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        return cls(order)

    def replay(self, seed_grad: np.ndarray) -> None:
        """Propagate adjoints in reverse order; leaves accumulate ``.grad``."""
        adj: dict[int, np.ndarray] = {id(self.nodes[-1]): seed_grad}
        for node in reversed(self.nodes):
            g = adj.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node._accumulate(g)
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in adj:
                    adj[key] = adj[key] + pg
                else:
                    adj[key] = pg


def backward(loss: Tensor) -> Tape:
    """Populate ``.grad`` on every requires-grad leaf reachable from ``loss``."""
    if loss.data.size != 1 or loss.data.ndim > 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("loss does not depend on any requires-grad tensor")
    tape = Tape.record(loss)
    tape.replay(np.ones_like(loss.data))
    return tape


def zero_grad(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


# ---------------------------------------------------------------- primitives


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    # only the broadcasts the pipeline uses: scalar, and row vector over a matrix
    if g.shape == shape:
        return g
    if shape == ():
        return np.asarray(g.sum())
    if len(shape) == 1 and g.ndim == 2 and g.shape[1] == shape[0]:
        return g.sum(axis=0)
    raise DimensionError(f"cannot reduce gradient of shape {g.shape} to {shape}")


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    sa, sb = a.shape, b.shape
    if sa == sb or sa == () or sb == ():
        return
    if len(sa) == 2 and len(sb) == 1 and sa[1] == sb[0]:
        return
    if len(sb) == 2 and len(sa) == 1 and sb[1] == sa[0]:
        return
    raise DimensionError(f"{op}: incompatible shapes {sa} and {sb}")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def bw(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _node(a.data + b.data, (a, b), "add", bw)


def neg(a: Tensor) -> Tensor:
    return _node(-a.data, (a,), "neg", lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def bw(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _node(a.data * b.data, (a, b), "mul", bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")

    def bw(g):
        return g @ b.data.T, a.data.T @ g

    return _node(a.data @ b.data, (a, b), "matmul", bw)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """``x @ weight.T + bias`` for a batch of row vectors ``x`` (n, in).

    ``weight`` is stored (out, in) so it reads like the column-vector form
    ``W x + b``.
    """
    if x.data.ndim != 2 or weight.data.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise DimensionError(f"linear: input {x.shape} does not fit weight {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise DimensionError(f"linear: bias {bias.shape} does not fit weight {weight.shape}")
    out = x.data @ weight.data.T
    if bias is not None:
        out = out + bias.data

    def bw(g):
        grads = [g @ weight.data, g.T @ x.data]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return tuple(grads)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return _node(out, parents, "linear", bw)


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so large |x| never overflows exp
    z = x.data
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return _node(out, (x,), "sigmoid", lambda g: (g * out * (1.0 - out),))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return _node(out, (x,), "tanh", lambda g: (g * (1.0 - out * out),))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _node(np.where(mask, x.data, 0.0), (x,), "relu", lambda g: (g * mask,))


ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "sigmoid": sigmoid,
    "tanh": tanh,
    "relu": relu,
}


def activation(x: Tensor, kind: str) -> Tensor:
    try:
        return ACTIVATIONS[kind](x)
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}; expected one of {sorted(ACTIVATIONS)}") from None


def hinge(x: Tensor) -> Tensor:
    """``max(0, x)`` elementwise."""
    out = relu(x)
    out._op = "hinge"
    return out


def total(x: Tensor) -> Tensor:
    shape = x.shape
    return _node(np.asarray(x.data.sum()), (x,), "sum", lambda g: (np.broadcast_to(g, shape),))


def mean(x: Tensor) -> Tensor:
    n = x.data.size
    shape = x.shape
    return _node(np.asarray(x.data.mean()), (x,), "mean", lambda g: (np.broadcast_to(g / n, shape),))


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = x.shape
    return _node(x.data.reshape(shape), (x,), "reshape", lambda g: (g.reshape(old),))


def take_rows(x: Tensor, index) -> Tensor:
    """Gather rows ``x[index]``; repeated indices accumulate on the way back."""
    idx = np.asarray(index, dtype=np.intp)
    shape = x.shape

    def bw(g):
        out = np.zeros(shape, dtype=DTYPE)
        np.add.at(out, idx, g)
        return (out,)

    return _node(x.data[idx], (x,), "take_rows", bw)


def rowdot(a: Tensor, b: Tensor) -> Tensor:
    """Row-wise inner products of two (n, k) matrices -> (n,)."""
    if a.shape != b.shape or a.data.ndim != 2:
        raise DimensionError(f"rowdot: shapes {a.shape} and {b.shape} differ")
    out = np.einsum("ij,ij->i", a.data, b.data)

    def bw(g):
        return g[:, None] * b.data, g[:, None] * a.data

    return _node(out, (a, b), "rowdot", bw)


def inner_tanh_score(u: Tensor, v: Tensor) -> Tensor:
    """``tanh(<u, v>)``; vectors give a scalar, (n, p) matrices give n scores row by row."""
    u, v = as_tensor(u), as_tensor(v)
    if u.shape != v.shape:
        raise DimensionError(f"inner_tanh_score: lengths differ, {u.shape} vs {v.shape}")
    if u.data.ndim == 1:
        dot = _node(np.asarray(u.data @ v.data), (u, v), "dot",
                    lambda g: (g * v.data, g * u.data))
        return tanh(dot)
    return tanh(rowdot(u, v))


def rowcos(a: Tensor, b: Tensor) -> tuple[Tensor, int]:
    """Row-wise cosine similarity of two (n, k) matrices.

    Rows where either side has zero norm yield 0 with zero gradient. Returns the
    tensor and the number of such degenerate rows.
    """
    if a.shape != b.shape or a.data.ndim != 2:
        raise DimensionError(f"rowcos: shapes {a.shape} and {b.shape} differ")
    na = np.sqrt(np.einsum("ij,ij->i", a.data, a.data))
    nb = np.sqrt(np.einsum("ij,ij->i", b.data, b.data))
    ok = (na > 0) & (nb > 0)
    dot = np.einsum("ij,ij->i", a.data, b.data)
    inv = np.where(ok, 1.0 / np.where(ok, na * nb, 1.0), 0.0)
    cos = dot * inv

    def bw(g):
        ia = np.where(ok, 1.0 / np.where(ok, na * na, 1.0), 0.0)
        ib = np.where(ok, 1.0 / np.where(ok, nb * nb, 1.0), 0.0)
        ga = g[:, None] * (b.data * inv[:, None] - cos[:, None] * a.data * ia[:, None])
        gb = g[:, None] * (a.data * inv[:, None] - cos[:, None] * b.data * ib[:, None])
        return ga, gb

    return _node(cos, (a, b), "rowcos", bw), int((~ok).sum())


def stack_columns(cols: Sequence[Tensor]) -> Tensor:
    """Stack k tensors of shape (n,) into an (n, k) matrix."""
    shapes = {c.shape for c in cols}
    if len(shapes) != 1 or len(next(iter(shapes))) != 1:
        raise DimensionError(f"stack_columns: expected equal 1-d shapes, got {sorted(shapes)}")
    out = np.stack([c.data for c in cols], axis=1)
    return _node(out, tuple(cols), "stack_columns",
                 lambda g: tuple(g[:, j] for j in range(g.shape[1])))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of integer ``labels`` under ``softmax(logits)``."""
    y = np.asarray(labels, dtype=np.intp)
    if logits.data.ndim != 2 or logits.shape[0] != y.shape[0]:
        raise DimensionError(f"softmax_cross_entropy: logits {logits.shape} vs labels {y.shape}")
    if y.size == 0:
        raise ContractError("softmax_cross_entropy on an empty batch")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logz = np.log(np.exp(z).sum(axis=1))
    n = y.shape[0]
    nll = (logz - z[np.arange(n), y]).mean()

    def bw(g):
        p = softmax(logits.data)
        p[np.arange(n), y] -= 1.0
        return (g * p / n,)

    return _node(np.asarray(nll), (logits,), "softmax_xent", bw)


def spmm_fixed(adj, x: Tensor) -> Tensor:
    """Constant sparse (symmetric) matrix times a dense tensor.

    Gradients flow into ``x`` only. The adjoint uses ``adj.T``, which equals
    ``adj`` for the normalized graphs this is used with.
    """
    if adj.shape[1] != x.shape[0]:
        raise DimensionError(f"spmm_fixed: adjacency {adj.shape} does not fit features {x.shape}")
    a = adj if sp.issparse(adj) and adj.format == "csr" else sp.csr_matrix(adj)
    # a.T of a csr matrix is a free csc view; no conversion per call
    return _node(np.asarray(a @ x.data), (x,), "spmm_fixed", lambda g: (np.asarray(a.T @ g),))
