"""End-to-end finite-difference check of the model + L1 loss gradients.

With every ReLU mask and loss sign held fixed, the loss is linear in any
single parameter or input sample, so a central difference is exact up to
rounding. A coordinate is skipped when its perturbation flips any mask or
sign, since that means the step crossed a kink.
"""
import contextlib
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigurationError
from .model import backward, build, forward_train
from .trainer import l1_loss

PRECISIONS = {
    # dtype, step, tolerance, denominator floor
    "wide": (np.float64, 1e-4, 1e-5, 1e-6),
    "standard": (np.float32, 1e-2, 1e-2, 1e-2),
}


@dataclass
class GradcheckResult:
    trials: int
    checked: int
    skipped: int
    max_rel_error: float
    worst: str
    tolerance: float

    @property
    def passed(self):
        return self.checked > 0 and self.max_rel_error <= self.tolerance

    def summary(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} max_rel_err={self.max_rel_error:.3e} tol={self.tolerance:.0e} "
                f"trials={self.trials} checked={self.checked} skipped={self.skipped} "
                f"worst={self.worst}")


def _evaluate(x, params, config, target):
    y, tape = forward_train(x, params, config)
    loss, grad = l1_loss(target, y, 0)
    masks = [m for hid, q in tape.hidden for m in (hid > 0, q > 0)]
    masks.append(np.sign(y.astype(np.float64) - target))
    return loss, grad, tape, masks


def _same(a, b):
    return all(np.array_equal(u, v) for u, v in zip(a, b))


def random_problem(config, rng, length, dtype):
    params = build(config, int(rng.integers(2**31)), dtype)
    for a in params.arrays():
        if a.ndim == 1:
            a[...] = rng.uniform(-0.5, 0.5, size=a.shape)
    x = rng.standard_normal(length).astype(dtype)
    target = rng.standard_normal(length)
    return params, x, target


def check_once(params, x, target, config, step, floor):
    """Compare analytic and central-difference gradients for every coordinate.

    Returns ``(max_rel_error, worst_name, checked, skipped)``.
    """
    loss, grad, tape, base = _evaluate(x, params, config, target)
    params.zero_grad()
    gx = backward(tape, grad, params, config)

    coords = [(f"x[{i}]", x, (i,), gx[i]) for i in range(x.size)]
    for (name, arr), g in zip(params.named_arrays(), params.grads()):
        for idx in np.ndindex(arr.shape):
            coords.append((f"{name}{list(idx)}", arr, idx, g[idx]))

    worst, worst_name, checked, skipped = 0.0, "", 0, 0
    for name, arr, idx, analytic in coords:
        orig = arr[idx]
        arr[idx] = orig + step
        lp, _, _, mp = _evaluate(x, params, config, target)
        arr[idx] = orig - step
        lm, _, _, mm = _evaluate(x, params, config, target)
        arr[idx] = orig
        if not (_same(mp, base) and _same(mm, base)):
            skipped += 1
            continue
        # the perturbed coordinate's rounded values, not the nominal step
        h = (float(arr.dtype.type(orig + step)) - float(arr.dtype.type(orig - step))) / 2
        numeric = (lp - lm) / (2 * h)
        analytic = float(analytic)
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        checked += 1
        if rel > worst:
            worst, worst_name = rel, name
    return worst, worst_name, checked, skipped


def gradcheck(config, trials=100, precision="wide", length=16, seed=0):
    """Run ``trials`` random parameter/input draws; see ``PRECISIONS`` for tolerances."""
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    if precision not in PRECISIONS:
        raise ConfigurationError(f"precision must be one of {sorted(PRECISIONS)}")
    dtype, step, tol, floor = PRECISIONS[precision]
    worst, worst_name, checked, skipped = 0.0, "", 0, 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        params, x, target = random_problem(config, rng, length, dtype)
        w, name, c, s = check_once(params, x, target, config, step, floor)
        checked += c
        skipped += s
        if w > worst:
            worst, worst_name = w, f"trial {trial}: {name}"
    return GradcheckResult(trials, checked, skipped, worst, worst_name, tol)


@contextlib.contextmanager
def corrupted_backward(scale=0.9):
    """Negative control: scale the input gradient returned by every block backward."""
    original = backend.block_backward

    def broken(*args, **kwargs):
        gx, gbt, gbq = original(*args, **kwargs)
        return gx * scale, gbt, gbq

    backend.block_backward = broken
    try:
        yield
    finally:
        backend.block_backward = original
