"""Minimal reverse-mode autodiff over float64 numpy buffers.

Ops run eagerly and append their backward closures to the active Tape;
`backward` replays the closures in exact reverse execution order. Opening
no tape (e.g. during evaluation) runs ops forward-only with no gradient
bookkeeping at all, which is what makes "no gradient ever touches the
eval split" checkable. One tape serves one training step; tapes are not
reusable.

Every op validates shapes up front and checks its output for NaN/Inf,
raising NumericError instead of propagating silent corruption.
"""

from __future__ import annotations

import struct
from typing import Callable, Iterable, Iterator

import numpy as np

from . import kernels

__all__ = [
    "SGD",
    "NumericError",
    "Params",
    "ShapeMismatchError",
    "Tape",
    "TapeError",
    "Variable",
    "add",
    "avg_pool2d",
    "backward",
    "bce_logits",
    "concat",
    "constant",
    "conv2d",
    "gather_rows",
    "glorot_uniform",
    "global_avg_pool",
    "grl",
    "l1",
    "linear",
    "load_params",
    "mean_all",
    "mul",
    "mul_scalar",
    "relu",
    "reshape",
    "save_params",
    "sigmoid",
    "softmax_ce",
    "sum_all",
    "transpose",
]


class NumericError(RuntimeError):
    """An op produced NaN/Inf, or training hit a non-finite loss."""


class ShapeMismatchError(ValueError):
    """Op inputs have incompatible shapes; message names the op and shapes."""


class TapeError(RuntimeError):
    """Tape misuse: backward on a consumed tape or a non-scalar loss."""


class Variable:
    """A float64 tensor with an optional gradient buffer."""

    __slots__ = ("value", "grad", "requires_grad")

    def __init__(self, value, requires_grad: bool = False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Variable(shape={self.value.shape}, requires_grad={self.requires_grad})"


def constant(value) -> Variable:
    return Variable(value, requires_grad=False)


_TAPE_STACK: list["Tape"] = []


class Tape:
    """Ordered record of executed ops; context manager activates it."""

    def __init__(self):
        self._records: list[Callable[[], None]] = []
        self.consumed = False

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _TAPE_STACK.pop()
        assert popped is self

    def record(self, fn: Callable[[], None]) -> None:
        self._records.append(fn)

    def __len__(self) -> int:
        return len(self._records)


def _active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def backward(tape: Tape, loss: Variable) -> None:
    """Fill gradients of everything the scalar `loss` depends on."""
    if loss.value.size != 1:
        raise TapeError(f"loss must be scalar, got shape {loss.value.shape}")
    if tape.consumed:
        raise TapeError("tape already consumed by a previous backward pass")
    tape.consumed = True
    loss.grad = np.ones_like(loss.value)
    for fn in reversed(tape._records):
        fn()


def _finite_or_raise(op: str, value: np.ndarray) -> None:
    if not np.all(np.isfinite(value)):
        raise NumericError(f"{op} produced non-finite values")


def _make_output(op: str, value: np.ndarray, *inputs: Variable | None) -> Variable:
    _finite_or_raise(op, value)
    tape = _active_tape()
    rg = tape is not None and any(v is not None and v.requires_grad for v in inputs)
    return Variable(value, requires_grad=rg)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcasted gradient back down to `shape`."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise and structural ops


def add(a: Variable, b: Variable) -> Variable:
    try:
        value = a.value + b.value
    except ValueError:
        raise ShapeMismatchError(f"add: incompatible shapes {a.shape} and {b.shape}") from None
    out = _make_output("add", value, a, b)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is None:
                return
            if a.requires_grad:
                a.accumulate(_unbroadcast(out.grad, a.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(out.grad, b.shape))

        tape.record(bwd)
    return out


def mul(a: Variable, b: Variable) -> Variable:
    try:
        value = a.value * b.value
    except ValueError:
        raise ShapeMismatchError(f"mul: incompatible shapes {a.shape} and {b.shape}") from None
    out = _make_output("mul", value, a, b)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is None:
                return
            if a.requires_grad:
                a.accumulate(_unbroadcast(out.grad * b.value, a.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(out.grad * a.value, b.shape))

        tape.record(bwd)
    return out


def mul_scalar(x: Variable, c: float) -> Variable:
    out = _make_output("mul_scalar", x.value * c, x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(out.grad * c)

        tape.record(bwd)
    return out


def relu(x: Variable) -> Variable:
    out = _make_output("relu", np.maximum(x.value, 0.0), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        pos = x.value > 0.0

        def bwd():
            if out.grad is not None:
                x.accumulate(out.grad * pos)

        tape.record(bwd)
    return out


def sigmoid(x: Variable) -> Variable:
    v = x.value
    value = np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))), np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v))))
    out = _make_output("sigmoid", value, x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(out.grad * value * (1.0 - value))

        tape.record(bwd)
    return out


def reshape(x: Variable, shape: tuple[int, ...]) -> Variable:
    out = _make_output("reshape", x.value.reshape(shape), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(out.grad.reshape(x.shape))

        tape.record(bwd)
    return out


def transpose(x: Variable, axes: tuple[int, ...]) -> Variable:
    out = _make_output("transpose", np.transpose(x.value, axes), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        inverse = tuple(np.argsort(axes))

        def bwd():
            if out.grad is not None:
                x.accumulate(np.transpose(out.grad, inverse))

        tape.record(bwd)
    return out


def concat(parts: Iterable[Variable], axis: int = 0) -> Variable:
    parts = list(parts)
    value = np.concatenate([p.value for p in parts], axis=axis)
    out = _make_output("concat", value, *parts)
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        sizes = [p.value.shape[axis] for p in parts]
        offsets = np.cumsum([0] + sizes)

        def bwd():
            if out.grad is None:
                return
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                if p.requires_grad:
                    index = [slice(None)] * out.grad.ndim
                    index[axis] = slice(lo, hi)
                    p.accumulate(out.grad[tuple(index)])

        tape.record(bwd)
    return out


def gather_rows(x: Variable, idx: np.ndarray) -> Variable:
    """Select rows of a 2D array; backward scatter-adds into them."""
    idx = np.asarray(idx, dtype=np.intp)
    out = _make_output("gather_rows", x.value[idx], x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is None:
                return
            gx = np.zeros_like(x.value)
            np.add.at(gx, idx, out.grad)
            x.accumulate(gx)

        tape.record(bwd)
    return out


def sum_all(x: Variable) -> Variable:
    out = _make_output("sum_all", np.array(x.value.sum()), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(np.full(x.shape, float(out.grad)))

        tape.record(bwd)
    return out


def mean_all(x: Variable) -> Variable:
    n = x.value.size
    out = _make_output("mean_all", np.array(x.value.mean()), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(np.full(x.shape, float(out.grad) / n))

        tape.record(bwd)
    return out


# ---------------------------------------------------------------------------
# neural-network ops


def conv2d(x: Variable, w: Variable, b: Variable | None = None, stride: int = 1, pad: int = 0) -> Variable:
    if x.value.ndim != 4 or w.value.ndim != 4 or x.value.shape[1] != w.value.shape[1]:
        raise ShapeMismatchError(f"conv2d: input {x.shape} incompatible with kernel {w.shape}")
    value = kernels.conv2d_forward(x.value, w.value, stride, pad)
    if b is not None:
        if b.value.shape != (w.value.shape[0],):
            raise ShapeMismatchError(f"conv2d: bias {b.shape} does not match kernel {w.shape}")
        value = value + b.value.reshape(1, -1, 1, 1)
    out = _make_output("conv2d", value, x, w, b)
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        kh, kw = w.value.shape[2], w.value.shape[3]
        h, wid = x.value.shape[2], x.value.shape[3]

        def bwd():
            if out.grad is None:
                return
            gy = out.grad
            if b is not None and b.requires_grad:
                b.accumulate(gy.sum(axis=(0, 2, 3)))
            if w.requires_grad:
                w.accumulate(kernels.conv2d_backward_kernel(x.value, gy, kh, kw, stride, pad))
            if x.requires_grad:
                x.accumulate(kernels.conv2d_backward_input(w.value, gy, h, wid, stride, pad))

        tape.record(bwd)
    return out


def linear(x: Variable, w: Variable, b: Variable | None = None) -> Variable:
    if x.value.ndim != 2 or w.value.ndim != 2 or x.value.shape[1] != w.value.shape[0]:
        raise ShapeMismatchError(f"linear: input {x.shape} incompatible with weight {w.shape}")
    value = x.value @ w.value
    if b is not None:
        if b.value.shape != (w.value.shape[1],):
            raise ShapeMismatchError(f"linear: bias {b.shape} does not match weight {w.shape}")
        value = value + b.value
    out = _make_output("linear", value, x, w, b)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is None:
                return
            gy = out.grad
            if b is not None and b.requires_grad:
                b.accumulate(gy.sum(axis=0))
            if w.requires_grad:
                w.accumulate(x.value.T @ gy)
            if x.requires_grad:
                x.accumulate(gy @ w.value.T)

        tape.record(bwd)
    return out


def avg_pool2d(x: Variable, k: int) -> Variable:
    n, c, h, w = x.value.shape
    if h % k or w % k:
        raise ShapeMismatchError(f"avg_pool2d: spatial size {(h, w)} not divisible by {k}")
    value = x.value.reshape(n, c, h // k, k, w // k, k).mean(axis=(3, 5))
    out = _make_output("avg_pool2d", value, x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                g = np.repeat(np.repeat(out.grad, k, axis=2), k, axis=3) / (k * k)
                x.accumulate(g)

        tape.record(bwd)
    return out


def global_avg_pool(x: Variable) -> Variable:
    """(N, C, H, W) -> (N, C) spatial mean."""
    n, c, h, w = x.value.shape
    out = _make_output("global_avg_pool", x.value.mean(axis=(2, 3)), x)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                x.accumulate(np.broadcast_to(out.grad[:, :, None, None], x.shape) / (h * w))

        tape.record(bwd)
    return out


def grl(x: Variable, lam: float) -> Variable:
    """Gradient reversal: exact identity forward, gradient scaled by -lam backward."""
    if lam <= 0:
        raise ValueError(f"grl lambda must be positive, got {lam}")
    tape = _active_tape()
    rg = tape is not None and x.requires_grad
    out = Variable(x.value, requires_grad=rg)  # shares the buffer: forward is the identity
    if rg:

        def bwd():
            if out.grad is not None:
                x.accumulate(out.grad * (-lam))

        tape.record(bwd)
    return out


def softmax_ce(logits: Variable, targets: np.ndarray) -> Variable:
    """Per-row cross entropy of (M, K) logits against integer class targets (M,)."""
    targets = np.asarray(targets, dtype=np.intp)
    if logits.value.ndim != 2 or targets.shape != (logits.value.shape[0],):
        raise ShapeMismatchError(f"softmax_ce: logits {logits.shape} vs targets {targets.shape}")
    z = logits.value
    zmax = z.max(axis=1, keepdims=True)
    logsumexp = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    rows = np.arange(z.shape[0])
    out = _make_output("softmax_ce", logsumexp - z[rows, targets], logits)
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        softmax = np.exp(z - zmax)
        softmax /= softmax.sum(axis=1, keepdims=True)

        def bwd():
            if out.grad is None:
                return
            g = softmax.copy()
            g[rows, targets] -= 1.0
            logits.accumulate(g * out.grad[:, None])

        tape.record(bwd)
    return out


def bce_logits(logits: Variable, labels: np.ndarray) -> Variable:
    """Elementwise binary cross entropy on logits; labels are 0/1 floats."""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != logits.value.shape:
        raise ShapeMismatchError(f"bce_logits: logits {logits.shape} vs labels {labels.shape}")
    z = logits.value
    value = np.maximum(z, 0.0) - z * labels + np.log1p(np.exp(-np.abs(z)))
    out = _make_output("bce_logits", value, logits)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is None:
                return
            sig = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
            logits.accumulate((sig - labels) * out.grad)

        tape.record(bwd)
    return out


def l1(pred: Variable, target: np.ndarray) -> Variable:
    """Elementwise absolute error with subgradient 0 at ties."""
    target = np.asarray(target, dtype=np.float64)
    if target.shape != pred.value.shape:
        raise ShapeMismatchError(f"l1: prediction {pred.shape} vs target {target.shape}")
    diff = pred.value - target
    out = _make_output("l1", np.abs(diff), pred)
    tape = _active_tape()
    if tape is not None and out.requires_grad:

        def bwd():
            if out.grad is not None:
                pred.accumulate(np.sign(diff) * out.grad)

        tape.record(bwd)
    return out


# ---------------------------------------------------------------------------
# parameters, optimizer, checkpoints


class Params:
    """Named collection of trainable Variables with deterministic order."""

    def __init__(self):
        self._vars: dict[str, Variable] = {}

    def add(self, name: str, value: np.ndarray) -> Variable:
        if name in self._vars:
            raise ValueError(f"duplicate parameter name {name!r}")
        var = Variable(value, requires_grad=True)
        self._vars[name] = var
        return var

    def __getitem__(self, name: str) -> Variable:
        return self._vars[name]

    def __contains__(self, name: str) -> bool:
        return name in self._vars

    def __len__(self) -> int:
        return len(self._vars)

    def items(self) -> Iterator[tuple[str, Variable]]:
        return iter(self._vars.items())

    def names(self) -> list[str]:
        return list(self._vars)

    def zero_grad(self) -> None:
        for v in self._vars.values():
            v.grad = None

    def state(self) -> dict[str, np.ndarray]:
        return {k: v.value.copy() for k, v in self._vars.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._vars) ^ set(state)
        if missing:
            raise KeyError(f"parameter set mismatch: {sorted(missing)}")
        for k, v in self._vars.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != v.value.shape:
                raise ShapeMismatchError(f"parameter {k!r}: stored {arr.shape} vs model {v.value.shape}")
            v.value = arr.copy()


class SGD:
    """Stochastic gradient descent with classical momentum.

    Update per parameter: v <- momentum * v - lr * grad; p <- p + v.
    Velocities persist across steps.
    """

    def __init__(self, params: Params, lr: float, momentum: float = 0.0):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocity = {name: np.zeros_like(v.value) for name, v in params.items()}

    def step(self) -> None:
        for name, p in self.params.items():
            if p.grad is None:
                continue
            v = self.velocity[name]
            v *= self.momentum
            v -= self.lr * p.grad
            p.value += v

    def zero_grad(self) -> None:
        self.params.zero_grad()


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


_CKPT_MAGIC = b"SSPARAMS1\n"


def save_params(path, params: Params) -> None:
    """Write the documented checkpoint container.

    Layout: the magic line, one `name ndim dims... offset` ASCII line per
    parameter (offset in bytes into the payload), an `END` line, then all
    buffers concatenated as little-endian float64.
    """
    lines = []
    offset = 0
    payload = []
    for name, var in params.items():
        arr = np.asarray(var.value, dtype=np.float64)
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"{name} {arr.ndim}{' ' + dims if dims else ''} {offset}\n")
        data = arr.astype("<f8").tobytes()
        payload.append(data)
        offset += len(data)
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write("".join(lines).encode("ascii"))
        fh.write(b"END\n")
        for chunk in payload:
            fh.write(chunk)


def load_params(path) -> dict[str, np.ndarray]:
    """Read a checkpoint container back into {name: array}."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(_CKPT_MAGIC):
        raise ValueError(f"{path}: not a parameter checkpoint (bad magic)")
    head_end = data.index(b"END\n", len(_CKPT_MAGIC))
    header = data[len(_CKPT_MAGIC) : head_end].decode("ascii").splitlines()
    payload = data[head_end + 4 :]
    out: dict[str, np.ndarray] = {}
    for line in header:
        fields = line.split()
        name, ndim = fields[0], int(fields[1])
        dims = tuple(int(d) for d in fields[2 : 2 + ndim])
        offset = int(fields[2 + ndim])
        count = int(np.prod(dims)) if dims else 1
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        out[name] = arr.reshape(dims).astype(np.float64)
    return out
