"""
Reverse-mode automatic differentiation over numpy arrays
A Tensor keeps its parents and a closure that pushes its gradient back to them
"""
import logging
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from utils.errors import DimensionError, GradientUsageError, NumericError

logger = logging.getLogger(__name__)

_GRAD_ENABLED = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without building a computation record"""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


@contextmanager
def enable_grad() -> Iterator[None]:
    """Re-enable recording inside a no_grad block"""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = True
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Float64 array node of the computation graph"""

    # numpy defers mixed ndarray/Tensor arithmetic to the Tensor operators
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._prev: Tuple["Tensor", ...] = ()
        self._backward: Callable[[], None] = lambda: None

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return not self._prev

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def check_finite(self, what: str = "tensor") -> "Tensor":
        if not np.all(np.isfinite(self.data)):
            raise NumericError(f"non-finite values in {what}")
        return self

    @staticmethod
    def lift(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def from_op(
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward_fn: BackwardFn,
        requires_grad: Optional[bool] = None,
    ) -> "Tensor":
        """
        Build an op output. `backward_fn(upstream)` returns one gradient
        (or None) per parent, in parent order.
        """
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=_GRAD_ENABLED and requires_grad)
        if out.requires_grad:
            out._prev = tuple(parents)

            def _backward() -> None:
                grads = backward_fn(out.grad)
                for parent, grad in zip(parents, grads):
                    if grad is not None and parent.requires_grad:
                        parent._accumulate(grad)

            out._backward = _backward
        return out

    def _accumulate(self, grad: np.ndarray) -> None:
        grad = _unbroadcast(np.asarray(grad, dtype=np.float64), self.shape)
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64).reshape(self.shape)
        else:
            self.grad = self.grad + grad

    # --------------------------------------------------------------- backward
    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._prev:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad=None) -> None:
        """
        Accumulate d(self)/d(leaf) * grad into every leaf that requires grad.
        Leaf gradients accumulate across calls; interior ones are recomputed.
        """
        if not self.requires_grad:
            raise GradientUsageError("backward() needs a value computed with a computation record")
        seed = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float64)
        if seed.shape != self.shape:
            raise DimensionError(f"upstream gradient shape {seed.shape} != output shape {self.shape}")

        order = self._topological_order()
        for node in order:
            if not node.is_leaf:
                node.grad = None
        self._accumulate(seed)
        for node in reversed(order):
            if node.grad is not None and not node.is_leaf:
                node._backward()

    # ------------------------------------------------------------- arithmetic
    def __add__(self, other) -> "Tensor":
        other = Tensor.lift(other)
        return Tensor.from_op(self.data + other.data, (self, other), lambda g: (g, g))

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        other = Tensor.lift(other)
        return Tensor.from_op(self.data - other.data, (self, other), lambda g: (g, -g))

    def __rsub__(self, other) -> "Tensor":
        return Tensor.lift(other) - self

    def __mul__(self, other) -> "Tensor":
        other = Tensor.lift(other)
        a, b = self.data, other.data
        return Tensor.from_op(a * b, (self, other), lambda g: (g * b, g * a))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = Tensor.lift(other)
        a, b = self.data, other.data
        return Tensor.from_op(a / b, (self, other), lambda g: (g / b, -g * a / (b * b)))

    def __rtruediv__(self, other) -> "Tensor":
        return Tensor.lift(other) / self

    def __neg__(self) -> "Tensor":
        return Tensor.from_op(-self.data, (self,), lambda g: (-g,))

    def __pow__(self, exponent: float) -> "Tensor":
        a = self.data
        return Tensor.from_op(a ** exponent, (self,), lambda g: (g * exponent * a ** (exponent - 1),))

    def __matmul__(self, other) -> "Tensor":
        other = Tensor.lift(other)
        a, b = self.data, other.data
        if b.ndim != 2:
            raise DimensionError("right operand of @ must be a matrix")
        if a.shape[-1] != b.shape[0]:
            raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")

        def grads(g):
            grad_a = g @ b.T
            grad_b = a.reshape(-1, b.shape[0]).T @ g.reshape(-1, b.shape[1])
            return grad_a, grad_b

        return Tensor.from_op(a @ b, (self, other), grads)

    # ------------------------------------------------------------- reductions
    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def grads(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape),)

        return Tensor.from_op(self.data.sum(axis=axis, keepdims=keepdims), (self,), grads)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else np.prod([self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # ------------------------------------------------------------ elementwise
    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor.from_op(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.log(a), (self,), lambda g: (g / a,))

    def sqrt(self) -> "Tensor":
        out = np.sqrt(self.data)
        # subgradient 0 at the origin
        safe = np.where(out > 0, out, 1.0)
        return Tensor.from_op(out, (self,), lambda g: (np.where(out > 0, 0.5 * g / safe, 0.0),))

    def abs(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.abs(a), (self,), lambda g: (g * np.sign(a),))

    def relu(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.maximum(a, 0.0), (self,), lambda g: (g * (a > 0),))

    def elu(self) -> "Tensor":
        a = self.data
        negative = np.expm1(np.minimum(a, 0.0))
        out = np.where(a > 0, a, negative)
        return Tensor.from_op(out, (self,), lambda g: (g * np.where(a > 0, 1.0, negative + 1.0),))

    def sigmoid(self) -> "Tensor":
        out = special.expit(self.data)
        return Tensor.from_op(out, (self,), lambda g: (g * out * (1.0 - out),))

    def normal_cdf(self) -> "Tensor":
        a = self.data
        density = np.exp(-0.5 * a * a) / np.sqrt(2.0 * np.pi)
        return Tensor.from_op(special.ndtr(a), (self,), lambda g: (g * density,))

    def clamp_min(self, floor: float) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.maximum(a, floor), (self,), lambda g: (g * (a > floor),))

    # ----------------------------------------------------------------- shapes
    def reshape(self, *shape) -> "Tensor":
        original = self.shape
        return Tensor.from_op(self.data.reshape(*shape), (self,), lambda g: (g.reshape(original),))

    def transpose(self, *axes) -> "Tensor":
        axes = axes or tuple(reversed(range(self.ndim)))
        inverse = np.argsort(axes)
        return Tensor.from_op(self.data.transpose(axes), (self,), lambda g: (g.transpose(inverse),))

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def __getitem__(self, index) -> "Tensor":
        shape = self.shape

        def grads(g):
            full = np.zeros(shape)
            np.add.at(full, index, g)
            return (full,)

        return Tensor.from_op(self.data[index], (self,), grads)


class Parameter(Tensor):
    """Trainable leaf; its gradient accumulator always has the value shape"""

    def __init__(self, data, name: Optional[str] = None):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True, name=name)
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)


def concatenate(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [Tensor.lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor.from_op(data, tensors, lambda g: np.split(g, splits, axis=axis))


def where(condition: np.ndarray, a, b) -> Tensor:
    a, b = Tensor.lift(a), Tensor.lift(b)
    condition = np.asarray(condition, dtype=bool)
    data = np.where(condition, a.data, b.data)
    return Tensor.from_op(data, (a, b), lambda g: (np.where(condition, g, 0.0), np.where(condition, 0.0, g)))


def backward(record: Tensor, upstream=None) -> None:
    """Functional form of Tensor.backward"""
    if not isinstance(record, Tensor):
        raise GradientUsageError("backward() needs the Tensor returned by a recorded forward pass")
    record.backward(upstream)


ArrayLike = Union[Tensor, np.ndarray, float]
