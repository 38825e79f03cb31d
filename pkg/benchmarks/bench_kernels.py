"""Head-to-head timing of the numpy and numba kernel builds.

Run: python benchmarks/bench_kernels.py [--n 128] [--blocks 4] [--repeats 50]

Imports both implementations directly (bypassing the AFDMSIM_BACKEND switch)
so one process measures both.  First numba calls compile; timings below use
warmed kernels.
"""

import argparse
import time

import numpy as np

from afdmsim._kernels import numba_impl, numpy_impl
from afdmsim import AfdmConfig, ConstellationSpec, build_time_channel, sample_paths
from afdmsim.detectors.mbuamp import build_factorizations


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--blocks", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()
    n, b = args.n, args.blocks

    rng = np.random.default_rng(0)
    spec = ConstellationSpec.qpsk()
    cfg = AfdmConfig.with_default_rule(n, 4, spec, block_count=b)
    real = sample_paths(4, 4.0, 4.0, 0.4, rng)
    gains = np.ascontiguousarray(real.gains)
    taps = np.ascontiguousarray(real.rc_taps())
    dops = np.ascontiguousarray(real.dopplers)

    ht = build_time_channel(real, n)
    facts = build_factorizations(ht, b)
    phi = np.ascontiguousarray(np.stack([f.phi for f in facts]))
    lam = np.ascontiguousarray(np.stack([f.lambda_vec for f in facts]))
    gidx = np.ascontiguousarray(np.stack([f.column_set for f in facts]).astype(np.int64))
    q = n // b
    rt = np.ascontiguousarray(
        rng.standard_normal((b, q)) + 1j * rng.standard_normal((b, q))
    )
    e_prev = np.zeros_like(rt)
    shat = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))

    u = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    v = np.ascontiguousarray(np.full(n, 0.3))
    prior = np.full((n, spec.size), 1.0 / spec.size)

    h_dense = np.ascontiguousarray(
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    )
    row_e = np.ascontiguousarray(np.sum(np.abs(h_dense) ** 2, axis=1))
    y = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))

    cases = [
        ("time_channel_matrix", lambda m: m.time_channel_matrix(gains, taps, dops, n)),
        ("affine_channel_matrix",
         lambda m: m.affine_channel_matrix(gains, taps, dops, cfg.c1, 0.0, n)),
        ("mbuamp_step",
         lambda m: m.mbuamp_step(phi, lam, gidx, rt, e_prev, shat, 1.0, 0.1, n)),
        ("qam_denoise", lambda m: m.qam_denoise(u, v, spec.points, prior)),
        ("gamp_linear_step",
         lambda m: m.gamp_linear_step(h_dense, row_e, y, shat, 0.5, shat, 0.1)),
    ]

    print(f"N={n}  B={b}  repeats={args.repeats} (best-of)")
    print(f"{'kernel':24s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, call in cases:
        call(numba_impl)  # warm JIT outside the timed region
        t_np = best_of(lambda: call(numpy_impl), args.repeats)
        t_nb = best_of(lambda: call(numba_impl), args.repeats)
        print(f"{name:24s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
