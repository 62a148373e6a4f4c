"""Pure NumPy implementation of the fused block kernels.

Mirrors ``_kernels.pyx`` operation for operation, including the order in
which partial sums are accumulated, so both backends give the same bits on
the same BLAS.

Every tap product is computed over all ``T`` rows and shifted afterwards,
never as a ``T - d`` row product. BLAS switches to a matrix-vector path for
single-row products, which rounds differently, and a row's value must not
depend on how many rows happen to be in the call.
"""
import numpy as np

NAME = "numpy"


def block_forward(x, wp, wc, wf, wq, b_taps, bq, d):
    """Run one dilated block forward.

    Returns ``(out, h, q)``: the block output ``x + q``, the hidden
    activation ``h = relu(taps + b_taps)`` and ``q = relu(h @ wq + bq)``.
    ``wf`` is None for a causal block.
    """
    T = x.shape[0]
    pre = x @ wc
    if d < T:
        pre[d:] += (x @ wp)[: T - d]
        if wf is not None:
            pre[: T - d] += (x @ wf)[d:]
    pre += b_taps
    h = np.maximum(pre, 0, out=pre)
    q = h @ wq
    q += bq
    np.maximum(q, 0, out=q)
    return x + q, h, q


def block_backward(x, h, q, gout, wp, wc, wf, wq, gwp, gwc, gwf, gwq, d):
    """Backpropagate ``gout`` through one block.

    Weight gradients are accumulated in place. Returns ``(gx, gb_taps,
    gbq)`` where the two bias sums must be added by the caller (``gb_taps``
    goes to each of the tap biases).
    """
    T = x.shape[0]
    gq = gout * (q > 0)
    gwq += h.T @ gq
    gbq = gq.sum(axis=0)
    gpre = gq @ wq.T
    gpre *= h > 0
    gwc += x.T @ gpre
    gb_taps = gpre.sum(axis=0)
    gx = gout + gpre @ wc.T
    if d < T:
        gwp += x[: T - d].T @ gpre[d:]
        gx[: T - d] += (gpre @ wp.T)[d:]
        if wf is not None:
            gwf += x[d:].T @ gpre[: T - d]
            gx[d:] += (gpre @ wf.T)[: T - d]
    return gx, gb_taps, gbq
