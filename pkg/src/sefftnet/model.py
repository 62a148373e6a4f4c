"""SE-FFTNet: a parallel, non-causal stack of dilated 3-tap blocks.

Each block reads its input at ``t - d``, ``t`` and ``t + d``, mixes each tap
with its own 1x1 conv, sums, applies ReLU, runs a second 1x1 conv + ReLU and
adds the block input back. A 1 -> C projection feeds the stack and a
C -> 1 projection reads out one sample per time step.

SE-FFTNet orders the dilations wide-to-narrow; SE-InvFFTNet narrow-to-wide.
"""
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConfigurationError
from .tensor import Conv1x1Params, rowwise_matmul

FFTNET_DILATIONS = (512, 256, 128, 64, 32, 16, 8, 4, 2, 1)


def fftnet_schedule(max_dilation=512, repeats=3):
    """Decreasing powers of two from ``max_dilation`` down to 1, repeated."""
    if max_dilation < 1 or max_dilation & (max_dilation - 1):
        raise ConfigurationError(f"max_dilation must be a power of two, got {max_dilation}")
    if repeats < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
    one = []
    d = max_dilation
    while d >= 1:
        one.append(d)
        d //= 2
    return tuple(one) * repeats


def invfftnet_schedule(max_dilation=512, repeats=3):
    """Increasing powers of two (WaveNet-like ordering), repeated."""
    return tuple(reversed(fftnet_schedule(max_dilation, repeats)))


@dataclass(frozen=True)
class ModelConfig:
    schedule: tuple
    channels: int = 256
    causal: bool = False

    def __post_init__(self):
        schedule = tuple(int(d) for d in self.schedule)
        object.__setattr__(self, "schedule", schedule)
        if not schedule:
            raise ConfigurationError("dilation schedule must not be empty")
        if any(d < 1 for d in schedule):
            raise ConfigurationError(f"every dilation must be >= 1, got {schedule}")
        if self.channels < 1:
            raise ConfigurationError(f"channels must be >= 1, got {self.channels}")

    @classmethod
    def se_fftnet(cls, channels=256, max_dilation=512, repeats=3, causal=False):
        return cls(fftnet_schedule(max_dilation, repeats), channels, causal)

    @classmethod
    def se_invfftnet(cls, channels=256, max_dilation=512, repeats=3, causal=False):
        return cls(invfftnet_schedule(max_dilation, repeats), channels, causal)

    def inverted(self):
        return ModelConfig(tuple(reversed(self.schedule)), self.channels, self.causal)


def receptive_field(config):
    """Return ``(r1, r2)``: how many past and future input samples reach one output."""
    r1 = sum(config.schedule)
    return r1, (0 if config.causal else r1)


def count_params(config):
    C = config.channels
    taps = 2 if config.causal else 3
    per_block = (taps + 1) * (C * C + C)
    return 2 * C + len(config.schedule) * per_block + (C + 1)


@dataclass
class BlockParams:
    tap_past: Conv1x1Params
    tap_present: Conv1x1Params
    tap_future: Conv1x1Params | None
    post: Conv1x1Params

    def convs(self):
        """Named 1x1 convs in checkpoint order."""
        out = [("tap_past", self.tap_past), ("tap_present", self.tap_present)]
        if self.tap_future is not None:
            out.append(("tap_future", self.tap_future))
        out.append(("post", self.post))
        return out

    def tap_bias(self):
        b = self.tap_past.bias + self.tap_present.bias
        if self.tap_future is not None:
            b = b + self.tap_future.bias
        return b


@dataclass
class ModelParams:
    input_proj: Conv1x1Params
    blocks: list
    final_fc: Conv1x1Params

    def convs(self):
        out = [("input_proj", self.input_proj)]
        for i, block in enumerate(self.blocks):
            out.extend((f"blocks.{i}.{name}", conv) for name, conv in block.convs())
        out.append(("final_fc", self.final_fc))
        return out

    def named_arrays(self):
        """``(name, array)`` pairs in the fixed checkpoint order (weight before bias)."""
        out = []
        for name, conv in self.convs():
            out.append((f"{name}.weight", conv.weight))
            out.append((f"{name}.bias", conv.bias))
        return out

    def named_grads(self):
        out = []
        for name, conv in self.convs():
            out.append((f"{name}.weight", conv.weight_grad))
            out.append((f"{name}.bias", conv.bias_grad))
        return out

    def arrays(self):
        return [a for _, a in self.named_arrays()]

    def grads(self):
        return [g for _, g in self.named_grads()]

    def zero_grad(self):
        for _, conv in self.convs():
            conv.zero_grad()

    @property
    def dtype(self):
        return self.input_proj.weight.dtype

    def size(self):
        return sum(a.size for a in self.arrays())

    def astype(self, dtype):
        blocks = [
            BlockParams(b.tap_past.astype(dtype), b.tap_present.astype(dtype),
                        None if b.tap_future is None else b.tap_future.astype(dtype),
                        b.post.astype(dtype))
            for b in self.blocks
        ]
        return ModelParams(self.input_proj.astype(dtype), blocks, self.final_fc.astype(dtype))

    def copy(self):
        return self.astype(self.dtype)


def _init_conv(rng, c_in, c_out, dtype):
    bound = 1.0 / np.sqrt(c_in)
    w = rng.uniform(-bound, bound, size=(c_in, c_out))
    return Conv1x1Params(w.astype(dtype), np.zeros(c_out, dtype=dtype))


def build(config, seed, dtype=np.float32):
    """Initialise parameters: weights ~ U(+-1/sqrt(fan_in)), zero biases.

    Draws happen in float64 in checkpoint order, so the float32 and float64
    builds of one seed agree up to rounding.
    """
    rng = np.random.default_rng(seed)
    C = config.channels
    input_proj = _init_conv(rng, 1, C, dtype)
    blocks = []
    for _ in config.schedule:
        past = _init_conv(rng, C, C, dtype)
        present = _init_conv(rng, C, C, dtype)
        future = None if config.causal else _init_conv(rng, C, C, dtype)
        post = _init_conv(rng, C, C, dtype)
        blocks.append(BlockParams(past, present, future, post))
    final_fc = _init_conv(rng, C, 1, dtype)
    return ModelParams(input_proj, blocks, final_fc)


def zeros(config, dtype=np.float32):
    """All-zero parameters for ``config`` (a zero block is the identity)."""
    C = config.channels

    def conv(c_in, c_out):
        return Conv1x1Params(np.zeros((c_in, c_out), dtype), np.zeros(c_out, dtype))

    blocks = [BlockParams(conv(C, C), conv(C, C), None if config.causal else conv(C, C), conv(C, C))
              for _ in config.schedule]
    return ModelParams(conv(1, C), blocks, conv(C, 1))


def check_params(params, config):
    C = config.channels
    if len(params.blocks) != len(config.schedule):
        raise ConfigurationError(
            f"{len(params.blocks)} blocks for a schedule of {len(config.schedule)}")
    if params.input_proj.weight.shape != (1, C) or params.final_fc.weight.shape != (C, 1):
        raise ConfigurationError("projection shapes do not match the channel width")
    for block in params.blocks:
        if (block.tap_future is None) != config.causal:
            raise ConfigurationError("future tap presence does not match causality")
        for _, conv in block.convs():
            if conv.weight.shape != (C, C):
                raise ConfigurationError(f"block conv shape {conv.weight.shape}, expected {(C, C)}")


def block_forward(x, p, d):
    """One block on a [T x C] array. Returns ``(out, h, q)``; see ``_fallback``."""
    if x.shape[1] != p.tap_present.c_in:
        raise ConfigurationError(
            f"block input has {x.shape[1]} channels, block expects {p.tap_present.c_in}")
    wf = None if p.tap_future is None else p.tap_future.weight
    return backend.block_forward(
        np.ascontiguousarray(x), p.tap_past.weight, p.tap_present.weight, wf,
        p.post.weight, p.tap_bias(), p.post.bias, d)


def block_backward(x, h, q, gout, p, d):
    wf = gwf = None
    if p.tap_future is not None:
        wf, gwf = p.tap_future.weight, p.tap_future.weight_grad
    gx, gb_taps, gbq = backend.block_backward(
        x, h, q, np.ascontiguousarray(gout),
        p.tap_past.weight, p.tap_present.weight, wf, p.post.weight,
        p.tap_past.weight_grad, p.tap_present.weight_grad, gwf, p.post.weight_grad, d)
    for conv in (p.tap_past, p.tap_present, p.tap_future):
        if conv is not None:
            conv.bias_grad += gb_taps
    p.post.bias_grad += gbq
    return gx


@dataclass
class Tape:
    """Activations recorded by ``forward_train`` for ``backward``."""

    x: np.ndarray
    block_inputs: list = field(default_factory=list)
    hidden: list = field(default_factory=list)
    last: np.ndarray | None = None


def _as_column(x, dtype):
    x = np.asarray(x, dtype=dtype)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != 1 or x.shape[0] < 1:
        raise ConfigurationError(f"model input must be [T] or [T x 1] with T >= 1, got {x.shape}")
    return x


def _run(x, params, config, tape):
    h = rowwise_matmul(x, params.input_proj.weight)
    h += params.input_proj.bias
    for d, block in zip(config.schedule, params.blocks):
        out, hid, q = block_forward(h, block, d)
        if tape is not None:
            tape.block_inputs.append(h)
            tape.hidden.append((hid, q))
        h = out
    if tape is not None:
        tape.last = h
    y = rowwise_matmul(h, params.final_fc.weight)[:, 0]
    y += params.final_fc.bias[0]
    return y


def forward(x, params, config):
    """Enhance a whole signal in one parallel pass; returns a [T] array.

    ``x`` may be [T] or [T x 1]. Boundary taps read zeros.
    """
    return _run(_as_column(x, params.dtype), params, config, None)


def forward_train(x, params, config):
    """Like ``forward`` but also returns the ``Tape`` needed by ``backward``."""
    x = _as_column(x, params.dtype)
    tape = Tape(x)
    return _run(x, params, config, tape), tape


def backward(tape, grad_y, params, config):
    """Accumulate parameter gradients for ``dL/dy = grad_y``; returns ``dL/dx`` as [T]."""
    grad_y = np.asarray(grad_y, dtype=params.dtype).reshape(-1, 1)
    fc = params.final_fc
    fc.weight_grad += tape.last.T @ grad_y
    fc.bias_grad += grad_y.sum(axis=0)
    g = grad_y * fc.weight[:, 0]
    for d, block, h_in, (hid, q) in zip(
            reversed(config.schedule), reversed(params.blocks),
            reversed(tape.block_inputs), reversed(tape.hidden)):
        g = block_backward(h_in, hid, q, g, block, d)
    ip = params.input_proj
    ip.weight_grad += tape.x.T @ g
    ip.bias_grad += g.sum(axis=0)
    return (g * ip.weight[0]).sum(axis=1)
