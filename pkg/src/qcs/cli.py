"""Command-line front door.

Subcommands: generate-matrix, simulate, reconstruct, evaluate,
verify {tilted-moments|ep|gradients|svd-path|reduction}, run.
Exit codes: 0 success, 2 config error, 3 numerical-verification failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import qmx
from .harness import ConfigError, ExperimentConfig, run_experiment
from .metrics import mse, psnr, ssim
from .quantizer import make_uniform, quantize
from .sampler import ChainResult, run_batch
from .sensing import EnsembleSpec, MeasurementModel, generate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3


def _cmd_generate_matrix(args):
    spec = EnsembleSpec(
        kind=args.kind,
        m=args.m,
        n=args.n,
        condition_number=args.kappa,
        correlation=args.rho,
        seed=args.seed,
    )
    model = generate(spec)
    qmx.save_qmx(args.out, model.A)
    s = model.svd_s[model.svd_s > 0]
    cond = s.max() / s.min() if s.size else float("nan")
    print(f"wrote {args.out}: {args.m}x{args.n} {args.kind}, cond={cond:.4g}")
    return EXIT_OK


def _cmd_simulate(args):
    A = qmx.load_qmx(args.matrix)
    x = qmx.load_qmx(args.x)
    model = MeasurementModel.from_matrix(np.atleast_2d(A), noise_std=args.noise_std)
    z_clean = model.A @ x
    sat = args.saturation
    if sat is None:
        scale = float(np.std(z_clean))
        sat = args.auto_sat_mult * scale if scale > 0 else 1.0
    quant = make_uniform(args.bits, sat)
    rng = np.random.default_rng(args.seed)
    v = z_clean + args.noise_std * rng.standard_normal(model.m) if args.noise_std > 0 else z_clean
    y = quantize(quant, v)
    qmx.save_qmx(args.out, y)
    if args.z_out:
        qmx.save_qmx(args.z_out, z_clean)
    print(f"wrote {args.out}: {model.m} measurements, bits={args.bits}, saturation={sat:.6g}")
    return EXIT_OK


def _cmd_reconstruct(args):
    cfg = ExperimentConfig.from_file(args.config)
    A = np.atleast_2d(qmx.load_qmx(args.matrix))
    y = qmx.load_qmx(args.y)
    model = MeasurementModel.from_matrix(A, noise_std=cfg.noise_std)
    qblock = cfg.raw["quantizer"]
    if qblock.get("saturation") is None and qblock["bits"] > 1:
        raise ConfigError("reconstruct needs an explicit quantizer.saturation (auto mode only applies when simulating)")
    quant = make_uniform(qblock["bits"], qblock.get("saturation") or 1.0)
    prior = cfg.build_prior()
    schedule = cfg.schedule()
    s_cfg = cfg.sampler_config(args.algo)
    results = run_batch(model, quant, y, prior, schedule, s_cfg, n_chains=args.chains)
    good = [r for r in results if isinstance(r, ChainResult)]
    if not good:
        for r in results:
            print(f"chain {r.chain_index} failed: {r.error}", file=sys.stderr)
        return 1
    x_hat = np.mean([r.x_hat for r in good], axis=0)
    qmx.save_qmx(args.out, x_hat)
    clamps = int(sum(r.ep_clamps.sum() for r in good))
    print(f"wrote {args.out}: {len(good)}/{args.chains} chains, algo={args.algo}, ep clamps={clamps}")
    return EXIT_OK


def _cmd_evaluate(args):
    x_hat = qmx.load_qmx(args.x_hat)
    x_true = qmx.load_qmx(args.x_true)
    out = {"mse": mse(x_hat, x_true)}
    out["psnr_db"] = psnr(x_hat, x_true, data_range=args.data_range)
    if args.image_dims:
        dims = tuple(int(d) for d in args.image_dims.split("x"))
        out["ssim"] = ssim(x_hat, x_true, dims, data_range=args.data_range)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_run(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.out:
        cfg.raw["output_dir"] = args.out
    report = run_experiment(cfg, verbose=not args.quiet)
    print(report.table())
    if cfg.output_dir:
        print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify subcommands: each prints residuals and returns EXIT_VERIFY on failure


def _verify_tilted_moments(args):
    from .oracles import quad_tilted_moments
    from .trunc_gauss import TiltedInputs, moments

    rng = np.random.default_rng(args.seed)
    worst_m = worst_v = 0.0
    for _ in range(args.probes):
        m = 6
        z = rng.normal(size=m)
        h = rng.normal(size=m)
        tau = float(rng.uniform(0.2, 5.0))
        edges = np.sort(rng.normal(scale=2.0, size=(m, 2)), axis=1)
        lo, hi = edges[:, 0].copy(), edges[:, 1].copy()
        lo[0], hi[1] = -np.inf, np.inf  # exercise one-sided bins too
        got = moments(TiltedInputs(z=z, h=h, tau=tau, lower=lo, upper=hi))
        ref_mean, ref_var, _ = quad_tilted_moments(lo, hi, z, h, tau)
        worst_m = max(worst_m, float(np.abs(got.mean - ref_mean).max()))
        worst_v = max(worst_v, float(np.abs(got.per_element_var - ref_var).max()))
    print(f"tilted-moments: max |mean err| = {worst_m:.3e}, max |var err| = {worst_v:.3e} (tol {args.tol})")
    return EXIT_OK if max(worst_m, worst_v) <= args.tol else EXIT_VERIFY


def _verify_ep(args):
    from .ep import EPConfig, ep_fixed_point, pseudo_log_likelihood
    from .oracles import mc_posterior_moments, mc_pseudolikelihood

    rng = np.random.default_rng(args.seed)
    spec = EnsembleSpec("ill_conditioned", args.m, args.n, condition_number=args.kappa, seed=args.seed)
    model = generate(spec, noise_std=args.noise_std)
    x = rng.standard_normal(args.n) / np.sqrt(args.n)
    z = model.A @ x
    quant = make_uniform(args.bits, 3.0 * float(np.std(z)) if args.bits > 1 else 1.0)
    y = quantize(quant, z + args.noise_std * rng.standard_normal(args.m))
    beta = args.beta
    cfg = EPConfig(iter_ep=30)

    state = ep_fixed_point(model, beta, z, quant, y, cfg)
    mc_mean, mc_se, mc_var, n_acc = mc_posterior_moments(model, beta, z, quant, y, args.mc_samples, args.seed + 1)
    mean_sigmas = float(np.abs(state.m_a - mc_mean).max() / np.maximum(mc_se, 1e-12).max())
    var_rel = abs(state.chi_a - float(np.mean(mc_var))) / float(np.mean(mc_var))
    print(f"ep moments: max |m_a - MC|/SE = {mean_sigmas:.2f} (accepted {n_acc}), "
          f"|chi_a - MC avg var| rel = {var_rel:.3%}")

    l0, _ = pseudo_log_likelihood(model, beta, z, quant, y, cfg)
    p0, se0 = mc_pseudolikelihood(model, beta, z, quant, y, args.mc_samples, args.seed + 2)
    worst = 0.0
    for j in range(4):
        zz = z + 0.15 * rng.standard_normal(args.m)
        l1, _ = pseudo_log_likelihood(model, beta, zz, quant, y, cfg)
        p1, se1 = mc_pseudolikelihood(model, beta, zz, quant, y, args.mc_samples, args.seed + 3 + j)
        r_mc = p1 / p0
        se_r = r_mc * np.sqrt((se1 / p1) ** 2 + (se0 / p0) ** 2)
        sig = abs(np.exp(l1 - l0) - r_mc) / se_r
        worst = max(worst, sig)
        print(f"  partition probe {j}: ratio err = {sig:.2f} MC standard errors")
    ok = mean_sigmas <= 3.0 and var_rel <= 0.05 and worst <= 3.0
    print(f"ep: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def _verify_gradients(args):
    from .ep import EPConfig, ep_fixed_point
    from .oracles import finite_diff_check
    from .priors import GaussianPrior, GMMPrior
    from .quantizer import intervals_for
    from .trunc_gauss import TiltedInputs, moments, score

    rng = np.random.default_rng(args.seed)
    n = 8
    worst = []

    cov = np.diag(rng.uniform(0.5, 2.0, n))
    gp = GaussianPrior(mean=rng.normal(size=n), cov=cov)
    smoothed = np.diag(cov) + 0.3**2

    def gp_logpdf(x):
        d = x - gp.mean
        return -0.5 * float(np.sum(d * d / smoothed)) - 0.5 * float(np.sum(np.log(smoothed)))

    rep = finite_diff_check(gp_logpdf, lambda x: gp.score(x, 0.3), [rng.normal(size=n) for _ in range(5)])
    worst.append(("gaussian prior", rep.max_rel_error))

    gmm = GMMPrior(weights=np.array([0.5, 0.5]), means=rng.normal(size=(2, n)), variances=np.array([0.3, 0.7]))
    rep = finite_diff_check(
        lambda x: gmm.log_density(x, 0.4), lambda x: gmm.score(x, 0.4), [rng.normal(size=n) for _ in range(5)]
    )
    worst.append(("gmm prior", rep.max_rel_error))

    spec = EnsembleSpec("ill_conditioned", n, n, condition_number=10.0, seed=args.seed)
    model = generate(spec, noise_std=0.2)
    x0 = rng.standard_normal(n) / np.sqrt(n)
    z0 = model.A @ x0
    quant = make_uniform(2, 3.0 * float(np.std(z0)))
    y = quantize(quant, z0)
    lo, hi = intervals_for(quant, y)
    state = ep_fixed_point(model, 0.3, z0, quant, y, EPConfig())

    def frozen_loglik(x):
        ti = TiltedInputs(z=model.A @ x, h=state.h_f, tau=state.tau_f, lower=lo, upper=hi)
        return moments(ti).log_partition

    def frozen_grad(x):
        ti = TiltedInputs(z=model.A @ x, h=state.h_f, tau=state.tau_f, lower=lo, upper=hi)
        return model.A.T @ score(ti)

    rep = finite_diff_check(frozen_loglik, frozen_grad, [x0 + 0.1 * rng.normal(size=n) for _ in range(5)])
    worst.append(("frozen-EP likelihood", rep.max_rel_error))

    bad = False
    for name, err in worst:
        print(f"gradients[{name}]: max rel err = {err:.3e} (tol {args.tol})")
        bad = bad or err > args.tol
    return EXIT_VERIFY if bad else EXIT_OK


def _verify_svd_path(args):
    from .ep import gaussian_projection

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.probes):
        m = int(rng.integers(2, 33))
        n = int(rng.integers(2, 33))
        model = MeasurementModel.from_matrix(rng.standard_normal((m, n)), noise_std=float(rng.uniform(0.05, 1.0)))
        beta = float(rng.uniform(0.0, 2.0))
        tau_g = float(rng.uniform(0.0, 3.0))
        h = rng.standard_normal(m)
        cov = model.noise_std**2 * np.eye(m) + beta**2 * (model.A @ model.A.T)
        prec = np.linalg.inv(cov)
        ref_m = np.linalg.solve(tau_g * np.eye(m) + prec, h)
        ref_chi = float(np.trace(np.linalg.inv(tau_g * np.eye(m) + prec)) / m)
        m_b, chi_b = gaussian_projection(model, beta, h, tau_g)
        scale = max(1.0, float(np.abs(ref_m).max()))
        worst = max(worst, float(np.abs(m_b - ref_m).max()) / scale, abs(chi_b - ref_chi) / max(ref_chi, 1e-300))
    print(f"svd-path: max rel err = {worst:.3e} over {args.probes} random shapes (tol {args.tol})")
    return EXIT_OK if worst <= args.tol else EXIT_VERIFY


def _verify_reduction(args):
    from .ep import diagonal_baseline_score, likelihood_score

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for k in range(args.probes):
        m, n = 8, 12
        spec = EnsembleSpec("row_orthogonal", m, n, seed=args.seed + k)
        model = generate(spec, noise_std=0.2)
        x = rng.standard_normal(n)
        z = model.A @ x
        quant = make_uniform(2, 3.0 * float(np.std(z)))
        y = quantize(quant, z + 0.2 * rng.standard_normal(m))
        g_plus, _ = likelihood_score(model, 0.6, x, quant, y)
        g_base = diagonal_baseline_score(model, 0.6, x, quant, y)
        worst = max(worst, float(np.abs(g_plus - g_base).max()))
    print(f"reduction: max |plus - baseline| = {worst:.3e} over {args.probes} seeds (tol {args.tol})")
    return EXIT_OK if worst <= args.tol else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-matrix", help="draw a sensing matrix and save it as QMX1")
    g.add_argument("--kind", required=True, choices=["row_orthogonal", "ill_conditioned", "correlated"])
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--kappa", type=float, default=1.0)
    g.add_argument("--rho", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=_cmd_generate_matrix)

    s = sub.add_parser("simulate", help="quantized noisy measurements y = Q(Ax + n)")
    s.add_argument("--matrix", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--bits", type=int, default=1)
    s.add_argument("--saturation", type=float, default=None)
    s.add_argument("--auto-sat-mult", type=float, default=3.0)
    s.add_argument("--noise-std", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--z-out", default=None, help="optionally save the clean pre-quantization signal")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=_cmd_simulate)

    r = sub.add_parser("reconstruct", help="posterior-sampling reconstruction from y")
    r.add_argument("--matrix", required=True)
    r.add_argument("--y", required=True)
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--chains", type=int, default=1)
    r.add_argument("--algo", choices=["plus", "baseline"], default="plus")
    r.set_defaults(func=_cmd_reconstruct)

    e = sub.add_parser("evaluate", help="score a reconstruction against the truth")
    e.add_argument("--x-hat", required=True)
    e.add_argument("--x-true", required=True)
    e.add_argument("--data-range", type=float, default=1.0)
    e.add_argument("--image-dims", default=None, help="HxW or HxWxC enables SSIM")
    e.set_defaults(func=_cmd_evaluate)

    v = sub.add_parser("verify", help="numerical verification against independent oracles")
    vsub = v.add_subparsers(dest="check", required=True)

    vt = vsub.add_parser("tilted-moments")
    vt.add_argument("--probes", type=int, default=20)
    vt.add_argument("--seed", type=int, default=0)
    vt.add_argument("--tol", type=float, default=1e-8)
    vt.set_defaults(func=_verify_tilted_moments)

    ve = vsub.add_parser("ep")
    ve.add_argument("--m", type=int, default=6)
    ve.add_argument("--n", type=int, default=6)
    ve.add_argument("--bits", type=int, default=1)
    ve.add_argument("--kappa", type=float, default=1000.0)
    ve.add_argument("--beta", type=float, default=0.05)
    ve.add_argument("--noise-std", type=float, default=0.5)
    ve.add_argument("--mc-samples", type=int, default=1_000_000)
    ve.add_argument("--seed", type=int, default=7)
    ve.set_defaults(func=_verify_ep)

    vg = vsub.add_parser("gradients")
    vg.add_argument("--seed", type=int, default=0)
    vg.add_argument("--tol", type=float, default=1e-6)
    vg.set_defaults(func=_verify_gradients)

    vs = vsub.add_parser("svd-path")
    vs.add_argument("--probes", type=int, default=25)
    vs.add_argument("--seed", type=int, default=0)
    vs.add_argument("--tol", type=float, default=1e-10)
    vs.set_defaults(func=_verify_svd_path)

    vr = vsub.add_parser("reduction")
    vr.add_argument("--probes", type=int, default=10)
    vr.add_argument("--seed", type=int, default=0)
    vr.add_argument("--tol", type=float, default=1e-8)
    vr.set_defaults(func=_verify_reduction)

    run = sub.add_parser("run", help="full experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=_cmd_run)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
