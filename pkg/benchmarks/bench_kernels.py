"""Compiled vs NumPy block kernels, plus a whole-model forward pass.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick]

Times are best-of-N wall clock per call in milliseconds.
"""
import argparse
import timeit

import numpy as np

from sefftnet import backend
from sefftnet.model import ModelConfig, build, forward


def block_args(C, T, dtype, rng):
    w = [(rng.standard_normal((C, C)) / np.sqrt(C)).astype(dtype) for _ in range(4)]
    x = rng.standard_normal((T, C)).astype(dtype)
    b = rng.standard_normal(C).astype(dtype)
    return x, w, b


def time_block(kernels, C, T, d, dtype, repeat):
    rng = np.random.default_rng(0)
    x, (wp, wc, wf, wq), b = block_args(C, T, dtype, rng)
    out, h, q = kernels.block_forward(x, wp, wc, wf, wq, b, b, d)
    g = rng.standard_normal((T, C)).astype(dtype)
    grads = [np.zeros_like(wp) for _ in range(4)]

    def fwd():
        kernels.block_forward(x, wp, wc, wf, wq, b, b, d)

    def bwd():
        kernels.block_backward(x, h, q, g, wp, wc, wf, wq, *grads, d)

    return best_ms(fwd, repeat), best_ms(bwd, repeat)


def best_ms(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="fewer shapes")
    args = ap.parse_args()

    names = ["numpy"]
    try:
        backend.load("cython")
        names.append("cython")
    except ImportError:
        print("compiled kernels not built; timing the NumPy fallback only")
    mods = {n: backend.load(n) for n in names}

    shapes = [(16, 4096), (64, 4096), (256, 4096)] if args.quick else \
        [(4, 1024), (16, 4096), (64, 4096), (128, 8192), (256, 4096), (256, 8192)]
    print(f"{'C':>4} {'T':>6} {'dtype':>7} " + " ".join(f"{n + ' fwd':>12} {n + ' bwd':>12}" for n in names)
          + ("   speedup fwd/bwd" if len(names) == 2 else ""))
    for C, T in shapes:
        for dtype in (np.float32, np.float64):
            times = {n: time_block(m, C, T, 64, dtype, args.repeat) for n, m in mods.items()}
            line = f"{C:4d} {T:6d} {np.dtype(dtype).name:>7} " + " ".join(
                f"{times[n][0]:12.3f} {times[n][1]:12.3f}" for n in names)
            if len(names) == 2:
                line += f"   {times['numpy'][0] / times['cython'][0]:5.2f}x / " \
                        f"{times['numpy'][1] / times['cython'][1]:5.2f}x"
            print(line)

    cfg = ModelConfig((8, 4, 2, 1) * 2, 64)
    params = build(cfg, 0)
    x = np.random.default_rng(1).standard_normal(16000).astype(np.float32)
    previous = backend.NAME
    print("\nmodel forward, 8 blocks, C=64, 1 s of audio:")
    for n in names:
        backend.use(n)
        print(f"  {n:>7}: {best_ms(lambda: forward(x, params, cfg), args.repeat):8.2f} ms")
    backend.use(previous)


if __name__ == "__main__":
    main()
