"""Acceptance suite: one criterion per test, one printed pass/fail line each.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
Every tolerance is fixed here; seeds are frozen so the suite is deterministic.
"""

import time

import numpy as np
import pytest

from qcs.ep import (
    EPConfig,
    diagonal_baseline_score,
    ep_fixed_point,
    gaussian_projection,
    likelihood_score,
    pseudo_log_likelihood,
)
from qcs.metrics import mse
from qcs.oracles import mc_pseudolikelihood
from qcs.priors import GaussianPrior, GMMPrior
from qcs.quantizer import intervals_for, make_sign, make_uniform, quantize
from qcs.sampler import ChainResult, SamplerConfig, make_geometric_schedule, run_batch, run_chain
from qcs.sensing import EnsembleSpec, MeasurementModel, generate
from qcs.trunc_gauss import TiltedInputs, moments, moments_1bit


def report(name, ok, detail):
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    assert ok, line


def make_instance(m, n, kappa, bits, noise_std, seed):
    rng = np.random.default_rng(seed)
    model = generate(EnsembleSpec("ill_conditioned", m, n, condition_number=kappa, seed=seed),
                     noise_std=noise_std)
    x = rng.standard_normal(n) / np.sqrt(n)
    z = model.A @ x
    quant = make_uniform(bits, 3.0 * float(np.std(z))) if bits > 1 else make_sign()
    y = quantize(quant, z + noise_std * rng.standard_normal(m))
    return model, x, z, quant, y, rng


def test_a1_pseudolikelihood_oracle():
    """EP log-partition tracks the Monte-Carlo integral over a grid of z.

    Ratios to a reference z are compared (removing the z-independent
    constant); each probe must sit within 3 MC standard errors.
    """
    t0 = time.time()
    beta, sigma, n_mc = 0.1, 0.5, 1_000_000
    mass_floor = 1e-4  # below this the MC ratio carries no information
    cfg = EPConfig(iter_ep=30)
    worst = 0.0
    probes = 0
    skipped = 0
    for kappa in (1.0, 1000.0):
        for bits in (1, 2, 3):
            seed = int(kappa) + 17 * bits
            rng = np.random.default_rng(seed)
            model = generate(
                EnsembleSpec("ill_conditioned", 6, 6, condition_number=kappa, seed=seed),
                noise_std=sigma,
            )
            x = rng.standard_normal(6)  # unit-variance signal keeps joint bin masses resolvable
            z = model.A @ x
            quant = make_uniform(bits, 3.0 * float(np.std(z))) if bits > 1 else make_sign()
            # mild realized noise: y's bins stay near z so the MC ratio has signal
            y = quantize(quant, z + 0.05 * rng.standard_normal(6))
            l0, _ = pseudo_log_likelihood(model, beta, z, quant, y, cfg)
            p0, se0 = mc_pseudolikelihood(model, beta, z, quant, y, n_mc, seed=seed + 1)
            assert p0 >= mass_floor, f"reference mass too small at kappa={kappa}, bits={bits}"
            for j in range(5):
                zz = z + 0.07 * rng.standard_normal(6)
                p1, se1 = mc_pseudolikelihood(model, beta, zz, quant, y, n_mc, seed=seed + 2 + j)
                if p1 < mass_floor:
                    skipped += 1
                    continue
                l1, _ = pseudo_log_likelihood(model, beta, zz, quant, y, cfg)
                r_mc = p1 / p0
                se_r = r_mc * np.sqrt((se1 / p1) ** 2 + (se0 / p0) ** 2)
                sig = abs(np.exp(l1 - l0) - r_mc) / se_r
                worst = max(worst, sig)
                probes += 1
    elapsed = time.time() - t0
    report(
        "A1",
        worst <= 3.0 and probes >= 20 and elapsed < 300,
        f"{probes} probes over kappa x bits grid ({skipped} below mass floor), "
        f"worst |ratio err| = {worst:.2f} MC SE (tol 3), {elapsed:.0f}s",
    )


def test_a2_gradient_identity():
    """Frozen-parameter likelihood gradient vs central differences, 50 probes."""
    t0 = time.time()
    m = n = 8
    model, x0, z0, quant, y, rng = make_instance(m, n, 50.0, 2, 0.2, seed=42)
    lo, hi = intervals_for(quant, y)
    beta = 0.3
    worst = 0.0
    eps = 1e-5
    for _ in range(50):
        x = x0 + 0.2 * rng.standard_normal(n)
        grad, st = likelihood_score(model, beta, x, quant, y)

        def frozen_lp(xx, st=st):
            ti = TiltedInputs(z=model.A @ xx, h=st.h_f, tau=st.tau_f, lower=lo, upper=hi)
            return moments(ti).log_partition

        for i in range(n):
            e = np.zeros(n)
            e[i] = eps
            fd = (frozen_lp(x + e) - frozen_lp(x - e)) / (2 * eps)
            rel = abs(grad[i] - fd) / max(abs(fd), abs(grad[i]), 1e-8)
            worst = max(worst, rel)
    elapsed = time.time() - t0
    report("A2", worst <= 1e-6 and elapsed < 60,
           f"50 probes, max rel error = {worst:.2e} (tol 1e-6), {elapsed:.1f}s")


def test_a3_reduction_to_diagonal_on_row_orthogonal():
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        model = generate(EnsembleSpec("row_orthogonal", 8, 12, seed=seed), noise_std=0.2)
        x = rng.standard_normal(12)
        z = model.A @ x
        quant = make_uniform(2, 3.0 * float(np.std(z)))
        y = quantize(quant, z + 0.2 * rng.standard_normal(8))
        g_plus, _ = likelihood_score(model, 0.5, x, quant, y)
        g_base = diagonal_baseline_score(model, 0.5, x, quant, y)
        worst = max(worst, float(np.abs(g_plus - g_base).max()))
    report("A3", worst <= 1e-8, f"10 row-orthogonal instances, max |diff| = {worst:.2e} (tol 1e-8)")


def test_a4_svd_fast_path():
    rng = np.random.default_rng(7)
    shapes = [(32, 8), (8, 32), (32, 32), (5, 31), (31, 5)]
    shapes += [(int(rng.integers(2, 33)), int(rng.integers(2, 33))) for _ in range(15)]
    worst = 0.0
    for m, n in shapes:
        A = rng.standard_normal((m, n))
        model = MeasurementModel.from_matrix(A, noise_std=float(rng.uniform(0.05, 1.0)))
        beta = float(rng.uniform(0.0, 2.0))
        tau_g = float(rng.uniform(0.0, 3.0))
        h = rng.standard_normal(m)
        prec = np.linalg.inv(model.noise_std**2 * np.eye(m) + beta**2 * A @ A.T)
        ref_m = np.linalg.solve(tau_g * np.eye(m) + prec, h)
        ref_chi = float(np.trace(np.linalg.inv(tau_g * np.eye(m) + prec)) / m)
        m_b, chi_b = gaussian_projection(model, beta, h, tau_g)
        scale = float(np.abs(ref_m).max())
        worst = max(worst, float(np.abs(m_b - ref_m).max()) / scale, abs(chi_b - ref_chi) / ref_chi)
    report("A4", worst <= 1e-10,
           f"{len(shapes)} shapes incl. tall/wide, max rel err = {worst:.2e} (tol 1e-10)")


def test_a5_one_bit_specialization():
    rng = np.random.default_rng(11)
    total = 1000
    worst = 0.0
    for start in range(0, total, 250):
        m = 250
        z = 3.0 * rng.standard_normal(m)
        h = rng.standard_normal(m)
        tau = float(rng.uniform(0.2, 5.0))
        y = np.where(rng.standard_normal(m) > 0, 1.0, -1.0)
        lo = np.where(y > 0, 0.0, -np.inf)
        hi = np.where(y > 0, np.inf, 0.0)
        ti = TiltedInputs(z=z, h=h, tau=tau, lower=lo, upper=hi)
        a = moments(ti)
        b = moments_1bit(ti, y)
        worst = max(
            worst,
            float(np.abs(a.mean - b.mean).max()),
            float(np.abs(a.per_element_var - b.per_element_var).max()),
            float(np.abs(a.score - b.score).max()),
            abs(a.var - b.var),
            abs(a.log_partition - b.log_partition) / max(abs(a.log_partition), 1.0),
        )
    report("A5", worst <= 1e-12, f"{total} random inputs, max |specialized - general| = {worst:.2e} (tol 1e-12)")


def test_a6_ep_convergence_after_five_iterations():
    results = []
    for kappa, tol in ((1.0, 1e-6), (1000.0, 1e-3)):
        worst = 0.0
        clamps = 0
        for seed in range(5):
            model, x, z, quant, y, rng = make_instance(32, 32, kappa, 1, 0.2, seed=seed)
            for beta in (0.05, 0.2, 0.5):
                st = ep_fixed_point(model, beta, z, quant, y, EPConfig(iter_ep=5))
                worst = max(worst, abs(st.chi_a - st.chi_b))
                clamps += st.clamp_count
        results.append((kappa, worst, tol, clamps))
    ok = all(w <= tol for _, w, tol, _ in results)
    detail = "; ".join(
        f"kappa={k:g}: |chi_a-chi_b| = {w:.2e} (tol {t:g}), clamps={c}" for k, w, t, c in results
    )
    report("A6", ok, detail)


def test_a7_gaussian_posterior_sampling():
    t0 = time.time()
    m = n = 16
    rng = np.random.default_rng(101)
    model = generate(EnsembleSpec("ill_conditioned", m, n, condition_number=5.0, seed=101),
                     noise_std=0.1)
    prior = GaussianPrior(mean=0.5 * np.ones(n), cov=0.25 * np.eye(n))
    x_true = prior.sample(rng)
    z = model.A @ x_true
    quant = make_uniform(8, 3.0 * float(np.std(z)))
    y = quantize(quant, z + 0.1 * rng.standard_normal(m))
    # 8-bit codeword labels are bin midpoints, so y is effectively the linear
    # measurement and the Gaussian posterior is available in closed form
    post_mean, _ = prior.posterior_given_linear(model.A, y, 0.1)
    sched = make_geometric_schedule(1.5, 0.04, 30)
    cfg = SamplerConfig(seed=203, k_inner=16, epsilon=5e-4)
    res = run_batch(model, quant, y, prior, sched, cfg, n_chains=50)
    finals = np.array([r.x_hat for r in res if isinstance(r, ChainResult)])
    mean = finals.mean(axis=0)
    se = finals.std(axis=0, ddof=1) / np.sqrt(len(finals))
    sig = float((np.abs(mean - post_mean) / se).max())
    elapsed = time.time() - t0
    report("A7", len(finals) == 50 and sig <= 3.0 and elapsed < 600,
           f"50 chains, max |mean err|/SE = {sig:.2f} (tol 3), {elapsed:.0f}s")


def test_a8_directional_superiority_ill_conditioned():
    t0 = time.time()
    n, m, k, trials = 32, 24, 4, 200
    sigma = 0.05
    rng = np.random.default_rng(900)
    means = rng.standard_normal((k, n))
    prior = GMMPrior(weights=np.full(k, 0.25), means=means, variances=np.full(k, 0.05**2))
    model = generate(EnsembleSpec("ill_conditioned", m, n, condition_number=1e3, seed=901),
                     noise_std=sigma)
    quant = make_sign()
    sched = make_geometric_schedule(2.0, 0.05, 30)
    mses = {"plus": [], "baseline": []}
    for trial in range(trials):
        trng = np.random.default_rng([0, trial])
        x_true = prior.sample(trng)
        y = quantize(quant, model.A @ x_true + sigma * trng.standard_normal(m))
        for algo in ("plus", "baseline"):
            cfg = SamplerConfig(
                seed=trial,
                k_inner=5,
                epsilon=1e-3,
                algo=algo,
                gamma_mode="scaled" if algo == "plus" else "fixed_one",
                xi=1.0,
                init_range=(-1.0, 1.0),
            )
            res = run_batch(model, quant, y, prior, sched, cfg, n_chains=1)[0]
            mses[algo].append(mse(res.x_hat, x_true))
    p = np.asarray(mses["plus"])
    b = np.asarray(mses["baseline"])
    pooled_se = float(np.sqrt(np.var(p, ddof=1) / trials + np.var(b, ddof=1) / trials))
    gap = float(b.mean() - p.mean())
    elapsed = time.time() - t0
    report(
        "A8",
        p.mean() < b.mean() and gap > 2 * pooled_se and elapsed < 1200,
        f"{trials} trials: MSE plus = {p.mean():.4f}, baseline = {b.mean():.4f}, "
        f"gap = {gap / pooled_se:.2f} x pooled SE (need > 2), {elapsed:.0f}s",
    )


def test_a9_hyperparameter_plumbing():
    cfg_default = SamplerConfig()
    ok_eps = cfg_default.epsilon == 0.002 and cfg_default.xi == 0.5

    model, x, z, quant, y, rng = make_instance(6, 6, 10.0, 1, 0.1, seed=77)
    prior = GaussianPrior(mean=np.zeros(6), cov=np.eye(6))
    sched = make_geometric_schedule(1.0, 0.1, 5)

    res = run_chain(model, quant, y, prior, sched, SamplerConfig(seed=1, k_inner=2))
    ok_alpha = res.alphas[-1] == 0.002  # alpha_T = epsilon exactly

    ok_gamma = True
    for xi in (0.5, 0.3):
        cfg = SamplerConfig(seed=2, k_inner=3, gamma_mode="scaled", xi=xi)
        r = run_chain(model, quant, y, prior, sched, cfg)
        live = r.lik_score_norms > 0
        lhs = r.gammas[live] * r.lik_score_norms[live]
        rhs = xi * r.prior_score_norms[live]
        ok_gamma &= bool(np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(rhs, 1.0)))

    report(
        "A9",
        ok_eps and ok_alpha and ok_gamma,
        f"defaults epsilon={cfg_default.epsilon}, xi={cfg_default.xi}; alpha_T == epsilon: {ok_alpha}; "
        f"gamma contract at xi in (0.5, 0.3) to 1e-12: {ok_gamma}",
    )
