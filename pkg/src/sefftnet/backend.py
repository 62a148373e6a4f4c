"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
NumPy ``_fallback`` is used. Set ``SEFFT_BACKEND=numpy`` to force the
fallback, or ``SEFFT_BACKEND=cython`` to make a missing extension an error.
"""
import importlib
import os

import numpy as np

_CHOICES = {"cython": "sefftnet._kernels", "numpy": "sefftnet._fallback"}


def load(name=None):
    """Return the kernel module for ``name`` ("cython", "numpy" or None for auto)."""
    if name is not None:
        if name not in _CHOICES:
            raise ValueError(f"unknown backend {name!r}; expected one of {sorted(_CHOICES)}")
        return importlib.import_module(_CHOICES[name])
    try:
        return importlib.import_module(_CHOICES["cython"])
    except ImportError:
        return importlib.import_module(_CHOICES["numpy"])


kernels = load(os.environ.get("SEFFT_BACKEND") or None)
NAME = kernels.NAME


def use(name):
    """Switch the active backend for this process (used by tests and benchmarks)."""
    global kernels, NAME
    kernels = load(name)
    NAME = kernels.NAME
    return kernels


def _pad_row(a):
    return np.concatenate([a, np.zeros_like(a)], axis=0)


# Single-row products go through BLAS gemv and round differently from gemm,
# so a one-sample input is padded with a zero row. Zero rows contribute exact
# zeros to every tap, which keeps row 0 bit-identical to the long-input result.

def block_forward(x, wp, wc, wf, wq, b_taps, bq, d):
    if x.shape[0] == 1:
        out, h, q = kernels.block_forward(_pad_row(x), wp, wc, wf, wq, b_taps, bq, d)
        return out[:1], h[:1], q[:1]
    return kernels.block_forward(x, wp, wc, wf, wq, b_taps, bq, d)


def block_backward(x, h, q, gout, wp, wc, wf, wq, gwp, gwc, gwf, gwq, d):
    if x.shape[0] == 1:
        gx, gbt, gbq = kernels.block_backward(
            _pad_row(x), _pad_row(h), _pad_row(q), _pad_row(gout),
            wp, wc, wf, wq, gwp, gwc, gwf, gwq, d)
        return gx[:1], gbt, gbq
    return kernels.block_backward(x, h, q, gout, wp, wc, wf, wq, gwp, gwc, gwf, gwq, d)
