"""Dense [time x channels] tensors and the three layer primitives.

Each forward primitive has a matching backward that *accumulates* into the
gradient buffers of its inputs. Buffers are never zeroed implicitly; call
``zero_grad`` between optimisation steps.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, UsageError


class PaddingPolicy(Enum):
    """Boundary handling for dilated taps. Out-of-range taps read zero."""

    ZERO = "zero"


@dataclass
class Tensor2:
    """A [T x C] value grid with an optional gradient grid of the same shape."""

    data: np.ndarray
    grad: np.ndarray | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise ConfigurationError(f"Tensor2 needs 2-D data, got shape {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ConfigurationError(f"Tensor2 needs T >= 1 and C >= 1, got {self.data.shape}")
        if self.grad is not None and self.grad.shape != self.data.shape:
            raise ConfigurationError(
                f"grad shape {self.grad.shape} does not match data shape {self.data.shape}")

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)
        return self


@dataclass
class Conv1x1Params:
    """Per-timestep channel mixing: ``weight`` is [C_in x C_out], ``bias`` is [C_out]."""

    weight: np.ndarray
    bias: np.ndarray
    weight_grad: np.ndarray | None = None
    bias_grad: np.ndarray | None = None

    def __post_init__(self):
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ConfigurationError(
                f"inconsistent 1x1 conv shapes: weight {self.weight.shape}, bias {self.bias.shape}")

    @property
    def c_in(self):
        return self.weight.shape[0]

    @property
    def c_out(self):
        return self.weight.shape[1]

    def zero_grad(self):
        self.weight_grad = np.zeros_like(self.weight)
        self.bias_grad = np.zeros_like(self.bias)

    def astype(self, dtype):
        return Conv1x1Params(self.weight.astype(dtype), self.bias.astype(dtype))


def rowwise_matmul(x, w):
    """``x @ w`` where each output row is computed the same way whatever ``len(x)`` is.

    BLAS takes a matrix-vector path for a single output column or a single
    row, which rounds differently from the gemm path.
    """
    if w.shape[1] == 1:
        return (x * w[:, 0]).sum(axis=1, keepdims=True)
    if w.shape[0] == 1:
        return x[:, :1] * w[0]
    if x.shape[0] == 1:
        return (np.concatenate([x, np.zeros_like(x)]) @ w)[:1]
    return x @ w


def conv1x1_forward(x, p):
    if x.shape[1] != p.c_in:
        raise ConfigurationError(f"input has {x.shape[1]} channels, conv expects {p.c_in}")
    out = rowwise_matmul(x.data, p.weight)
    out += p.bias
    return Tensor2(out)


def _require_grads(*tensors):
    for t in tensors:
        if t.grad is None:
            raise UsageError("backward needs a grad buffer; call zero_grad() first")


def conv1x1_backward(x, p, out):
    """Accumulate gradients of a 1x1 conv given ``out.grad``."""
    _require_grads(x, out)
    if p.weight_grad is None or p.bias_grad is None:
        raise UsageError("conv parameters have no grad buffers; call zero_grad() first")
    g = out.grad
    p.weight_grad += x.data.T @ g
    p.bias_grad += g.sum(axis=0)
    x.grad += g @ p.weight.T


def _check_tap(d, offset):
    if d < 1:
        raise ConfigurationError(f"dilation must be >= 1, got {d}")
    if offset not in (-1, 0, 1):
        raise ConfigurationError(f"tap offset must be -1, 0 or +1, got {offset}")


def _shift(a, s):
    # out[t] = a[t + s], zero outside
    T = a.shape[0]
    out = np.zeros_like(a)
    if s == 0:
        out[:] = a
    elif abs(s) < T:
        if s > 0:
            out[: T - s] = a[s:]
        else:
            out[-s:] = a[: T + s]
    return out


def dilated_tap_gather(x, d, offset, pad=PaddingPolicy.ZERO):
    """Return ``out[t] = x[t + offset * d]``; offset -1 reads the past, +1 the future."""
    _check_tap(d, offset)
    if pad is not PaddingPolicy.ZERO:
        raise ConfigurationError(f"unsupported padding policy {pad}")
    return Tensor2(_shift(x.data, offset * d))


def dilated_tap_gather_backward(x, out, d, offset):
    """Adjoint of the gather: shift ``out.grad`` back and add it into ``x.grad``."""
    _check_tap(d, offset)
    _require_grads(x, out)
    x.grad += _shift(out.grad, -offset * d)


def relu_forward(x):
    return Tensor2(np.maximum(x.data, 0))


def relu_backward(x, out):
    """Pass ``out.grad`` where ``x > 0``; the derivative at exactly zero is 0."""
    _require_grads(x, out)
    x.grad += np.where(x.data > 0, out.grad, 0)
