"""Benchmark: compiled vs pure tilted-Gaussian kernel, and one EP-heavy chain.

Run:  python benchmarks/bench_tilted.py
"""

import time

import numpy as np

from qcs.kernels import available_backends


def bench_kernel(sizes=(1_000, 10_000, 100_000, 1_000_000), repeats=7):
    backends = available_backends()
    rng = np.random.default_rng(0)
    print(f"{'M':>10} " + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for m in sizes:
        z = rng.normal(size=m)
        h = rng.normal(size=m)
        tau = rng.uniform(0.2, 4.0, m)
        edges = np.sort(rng.normal(scale=3.0, size=(m, 2)), axis=1)
        lo = edges[:, 0].copy()
        hi = np.maximum(edges[:, 1], lo + 0.05)
        lo[: m // 10] = -np.inf
        hi[m // 10 : m // 5] = np.inf
        times = {}
        for name, kernel in backends.items():
            kernel(lo, hi, z, h, tau)  # warm up
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                kernel(lo, hi, z, h, tau)
                best = min(best, time.perf_counter() - t0)
            times[name] = best
        row = f"{m:>10} " + "".join(f"{times[name] * 1e3:>12.3f}ms" for name in backends)
        if "compiled" in times and "pure" in times:
            row += f"{times['pure'] / times['compiled']:>9.1f}x"
        print(row)


def bench_chain():
    from qcs.priors import GMMPrior
    from qcs.quantizer import make_sign, quantize
    from qcs.sampler import SamplerConfig, make_geometric_schedule, run_chain
    from qcs.sensing import EnsembleSpec, generate

    import qcs.kernels as kernels

    rng = np.random.default_rng(900)
    n, m = 64, 48
    means = rng.standard_normal((4, n))
    prior = GMMPrior(weights=np.full(4, 0.25), means=means, variances=np.full(4, 0.05**2))
    model = generate(EnsembleSpec("ill_conditioned", m, n, condition_number=1e3, seed=901), noise_std=0.05)
    quant = make_sign()
    x_true = prior.sample(rng)
    y = quantize(quant, model.A @ x_true + 0.05 * rng.standard_normal(m))
    sched = make_geometric_schedule(2.0, 0.05, 30)
    cfg = SamplerConfig(seed=0, k_inner=5, epsilon=1e-3, algo="plus", init_range=(-1.0, 1.0))

    print("\nfull chain (T=30, K=5, IterEP=5, M=48, N=64):")
    for name, kernel in available_backends().items():
        original = kernels.tilted_interval_stats
        kernels.tilted_interval_stats = kernel
        # ep module binds the symbol at import; patch there too
        import qcs.ep as ep_mod

        ep_original = ep_mod.tilted_interval_stats
        ep_mod.tilted_interval_stats = kernel
        try:
            t0 = time.perf_counter()
            run_chain(model, quant, y, prior, sched, cfg)
            dt = time.perf_counter() - t0
        finally:
            kernels.tilted_interval_stats = original
            ep_mod.tilted_interval_stats = ep_original
        print(f"  {name:>9}: {dt * 1e3:8.1f} ms")


if __name__ == "__main__":
    bench_kernel()
    bench_chain()
