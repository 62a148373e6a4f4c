"""Edge-excluded L1 loss, Adam, and the single-example training loop.

Training walks fixed windows of each utterance. A window predicts up to
``target_field`` samples and carries ``r`` samples of real context on each
side, where ``r = max(r1, r2)``, so no predicted sample ever sees padding.
Window order is reshuffled every epoch from ``(seed, epoch)``. The position
in the schedule therefore follows from the step counter alone, and a
checkpoint only has to store parameters plus optimizer moments.
"""
import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checkpoint
from .errors import ConfigurationError, DataError, NonFiniteError
from .model import backward, check_params, forward_train, receptive_field


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    target_field: int = 4096
    batch_size: int = 1
    max_steps: int = 1000
    checkpoint_interval: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.target_field < 1:
            raise ConfigurationError(f"target_field must be >= 1, got {self.target_field}")
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise ConfigurationError(f"learning_rate must be finite and >= 0, got {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or self.epsilon <= 0:
            raise ConfigurationError("Adam needs 0 <= beta < 1 and epsilon > 0")
        if self.batch_size != 1:
            raise ConfigurationError("only batch_size = 1 is supported")
        if self.max_steps < 0 or self.checkpoint_interval < 0:
            raise ConfigurationError("max_steps and checkpoint_interval must be >= 0")


def l1_loss(y, y_hat, r=0):
    """Mean absolute error over the ``T - 2r`` samples ``r .. T-r-1``.

    Returns ``(loss, grad)`` where ``grad`` is dL/dy_hat: ``sign(y_hat - y) /
    (T - 2r)`` inside, zero on the excluded edges (and where ``y_hat == y``).
    """
    y = np.asarray(y)
    y_hat = np.asarray(y_hat)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ConfigurationError(f"loss needs equal-length 1-D signals, got {y.shape} and {y_hat.shape}")
    T = y.shape[0]
    n = T - 2 * r
    if r < 0 or n < 1:
        raise ConfigurationError(f"edge exclusion r={r} leaves no samples of T={T}")
    diff = y_hat[r:T - r].astype(np.float64) - y[r:T - r].astype(np.float64)
    loss = float(np.abs(diff).sum() / n)
    grad = np.zeros(T, dtype=y_hat.dtype if y_hat.dtype.kind == "f" else np.float64)
    grad[r:T - r] = np.sign(diff) / n
    return loss, grad


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls([np.zeros_like(a) for a in params.arrays()],
                   [np.zeros_like(a) for a in params.arrays()], 0)


def adam_step(params, state, cfg):
    """Bias-corrected Adam update of ``params`` from their accumulated grads.

    Refuses to move anything if any gradient is non-finite.
    """
    named = params.named_arrays()
    grads = params.grads()
    for (name, _), g in zip(named, grads):
        if g is None:
            raise ConfigurationError(f"{name} has no gradient buffer")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient in {name} at step {state.step + 1}")
    state.step += 1
    b1, b2, lr, eps = cfg.beta1, cfg.beta2, cfg.learning_rate, cfg.epsilon
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for (_, p), g, m, v in zip(named, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


OPT_MAGIC = b"SEFA"
OPT_VERSION = 1


def save_optimizer(path, state):
    """Adam moments: magic, version u32, step u64, n u32, itemsize u32, m..., v..."""
    dtype = state.m[0].dtype
    n = sum(a.size for a in state.m)
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIQII", OPT_MAGIC, OPT_VERSION, state.step, n, dtype.itemsize))
        for a in state.m + state.v:
            f.write(np.asarray(a, dtype=dtype.newbyteorder("<")).tobytes())


def load_optimizer(path, params):
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 24 or blob[:4] != OPT_MAGIC:
        raise DataError(f"{path}: not an optimizer state file")
    version, step, n, itemsize = struct.unpack_from("<IQII", blob, 4)
    if version != OPT_VERSION or itemsize not in (4, 8):
        raise DataError(f"{path}: unsupported optimizer state")
    if n != params.size() or len(blob) != 24 + 2 * n * itemsize:
        raise DataError(f"{path}: optimizer state does not match the model")
    values = np.frombuffer(blob, dtype=f"<f{itemsize}", offset=24).astype(params.dtype)
    state = AdamState.zeros_like(params)
    state.step = step
    pos = 0
    for a in state.m + state.v:
        a[...] = values[pos:pos + a.size].reshape(a.shape)
        pos += a.size
    return state


@dataclass(frozen=True)
class TrainBatch:
    noisy: np.ndarray
    clean: np.ndarray
    utterance: int
    utterance_length: int
    start: int
    edge: int


def training_windows(lengths, target_field, r):
    """``(utterance, start, n)`` for every target field tiling ``[r, T - r)``.

    Utterances shorter than ``target_field + 2r`` give one window covering
    their whole interior; those with no interior (``T <= 2r``) are skipped.
    """
    windows = []
    for u, T in enumerate(lengths):
        for start in range(r, T - r, target_field):
            windows.append((u, start, min(target_field, T - r - start)))
    return windows


def epoch_order(n_windows, seed, epoch):
    return np.random.default_rng([seed, epoch]).permutation(n_windows)


def make_batch(pair, u, start, n, r):
    noisy, clean = pair
    lo, hi = start - r, start + n + r
    return TrainBatch(noisy[lo:hi], clean[lo:hi], u, len(noisy), start, r)


@dataclass
class TrainResult:
    state: AdamState
    log: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)


def checkpoint_paths(out_dir, step):
    base = Path(out_dir) / f"ckpt_{step:07d}"
    return base.with_suffix(".seff"), base.with_suffix(".adam")


def save_training_state(out_dir, config, params, state):
    model_path, opt_path = checkpoint_paths(out_dir, state.step)
    checkpoint.save(model_path, config, params)
    save_optimizer(opt_path, state)
    return model_path


def load_training_state(model_path):
    """Load a ``.seff`` checkpoint and its sibling ``.adam`` file."""
    model_path = Path(model_path)
    config, params = checkpoint.load(model_path)
    opt_path = model_path.with_suffix(".adam")
    if not opt_path.exists():
        raise DataError(f"no optimizer state next to {model_path}")
    return config, params, load_optimizer(opt_path, params)


LOG_HEADER = ("step", "utterance", "loss")


def _open_log(path, resume_step, prior=None):
    rows = []
    source = path if path.exists() else prior
    if resume_step > 0 and source is not None and Path(source).exists():
        with open(source, newline="") as f:
            rows = [row for row in csv.reader(f)][1:]
        rows = [row for row in rows if int(row[0]) <= resume_step]
    f = open(path, "w", newline="")
    w = csv.writer(f, lineterminator="\n")
    w.writerow(LOG_HEADER)
    w.writerows(rows)
    return f, w


def train(params, config, pairs, cfg, out_dir=None, state=None, progress=None, prior_log=None):
    """Train ``params`` in place on ``(noisy, clean)`` sample arrays.

    Runs until ``state.step == cfg.max_steps``. With ``out_dir``, writes
    ``loss.csv`` and checkpoints every ``checkpoint_interval`` steps plus one at
    the end. When resuming into a directory without a log, rows up to
    ``state.step`` are copied from ``prior_log``. A non-finite loss raises
    ``NonFiniteError`` before the step is applied, so the newest checkpoint
    on disk is the last good one.
    """
    check_params(params, config)
    if not pairs:
        raise ConfigurationError("training needs at least one utterance")
    r = max(receptive_field(config))
    windows = training_windows([len(n) for n, _ in pairs], cfg.target_field, r)
    if not windows:
        raise ConfigurationError(f"every utterance is shorter than the receptive field 2*{r}+1")
    pairs = [(np.asarray(n, dtype=params.dtype), np.asarray(c, dtype=params.dtype)) for n, c in pairs]
    state = state if state is not None else AdamState.zeros_like(params)
    result = TrainResult(state)

    log_file = writer = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        log_file, writer = _open_log(out_dir / "loss.csv", state.step, prior_log)
    order, order_epoch = None, -1
    try:
        while state.step < cfg.max_steps:
            epoch, pos = divmod(state.step, len(windows))
            if epoch != order_epoch:
                order, order_epoch = epoch_order(len(windows), cfg.seed, epoch), epoch
            u, start, n = windows[order[pos]]
            batch = make_batch(pairs[u], u, start, n, r)
            y_hat, tape = forward_train(batch.noisy, params, config)
            loss, grad = l1_loss(batch.clean, y_hat, batch.edge)
            if not math.isfinite(loss):
                raise NonFiniteError(f"non-finite loss at step {state.step + 1} (utterance {u})")
            params.zero_grad()
            backward(tape, grad, params, config)
            adam_step(params, state, cfg)
            row = (state.step, u, loss)
            result.log.append(row)
            if writer is not None:
                writer.writerow((row[0], row[1], repr(row[2])))
                if cfg.checkpoint_interval and state.step % cfg.checkpoint_interval == 0:
                    result.checkpoints.append(save_training_state(out_dir, config, params, state))
            if progress is not None:
                progress(row)
        if out_dir is not None and (not result.checkpoints or result.checkpoints[-1] !=
                                    checkpoint_paths(out_dir, state.step)[0]):
            result.checkpoints.append(save_training_state(out_dir, config, params, state))
    finally:
        if log_file is not None:
            log_file.close()
    return result
