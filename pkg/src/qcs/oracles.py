"""Independent numerical oracles: Monte-Carlo integrals and gradient checks.

These deliberately avoid the code paths they verify: the Monte-Carlo
estimators sample the correlated noise directly through the cached SVD and
count indicator hits, and the gradient checker uses plain central
differences on a scalar field.
"""

from dataclasses import dataclass

import numpy as np

from .quantizer import QuantizerSpec, intervals_for
from .sensing import MeasurementModel, gaussian_covariance_eigs

__all__ = [
    "mc_pseudolikelihood",
    "mc_posterior_moments",
    "finite_diff_check",
    "FiniteDiffReport",
    "quad_tilted_moments",
]

_BATCH = 1 << 17


def _noise_sampler(model: MeasurementModel, beta: float, rng):
    """Draws from N(0, sigma^2 I + beta^2 A A^T) via the cached SVD."""
    sd = np.sqrt(gaussian_covariance_eigs(model, beta))

    def draw(count):
        g = rng.standard_normal((count, model.m))
        return (g * sd) @ model.svd_u.T

    return draw


def mc_pseudolikelihood(
    model: MeasurementModel,
    beta: float,
    z,
    quantizer: QuantizerSpec,
    y,
    n_samples: int = 1_000_000,
    seed: int = 0,
):
    """Monte-Carlo estimate of the probability that z plus correlated noise
    lands in every observed codeword bin.  Returns (estimate, standard_error).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    z = np.asarray(z, dtype=float)
    lo, hi = intervals_for(quantizer, y)
    rng = np.random.default_rng(seed)
    draw = _noise_sampler(model, beta, rng)
    hits = 0
    done = 0
    while done < n_samples:
        b = min(_BATCH, n_samples - done)
        w = z + draw(b)
        hits += int(np.all((w >= lo) & (w < hi), axis=1).sum())
        done += b
    p = hits / n_samples
    se = float(np.sqrt(p * (1.0 - p) / n_samples))
    return p, se


def mc_posterior_moments(
    model: MeasurementModel,
    beta: float,
    z,
    quantizer: QuantizerSpec,
    y,
    n_samples: int = 1_000_000,
    seed: int = 0,
):
    """Rejection-sampled posterior mean/variance of the noise given the bins.

    Returns (mean, mean_se, per_element_var, n_accepted).  Used to check the
    moment-matching engine against the exact tilted posterior.
    """
    z = np.asarray(z, dtype=float)
    lo, hi = intervals_for(quantizer, y)
    rng = np.random.default_rng(seed)
    draw = _noise_sampler(model, beta, rng)
    s1 = np.zeros(model.m)
    s2 = np.zeros(model.m)
    accepted = 0
    done = 0
    while done < n_samples:
        b = min(_BATCH, n_samples - done)
        w = draw(b)
        ok = np.all((z + w >= lo) & (z + w < hi), axis=1)
        wa = w[ok]
        s1 += wa.sum(axis=0)
        s2 += (wa * wa).sum(axis=0)
        accepted += wa.shape[0]
        done += b
    if accepted < 2:
        raise RuntimeError("rejection sampler accepted fewer than 2 draws")
    mean = s1 / accepted
    var = s2 / accepted - mean**2
    mean_se = np.sqrt(var / accepted)
    return mean, mean_se, var, accepted


def quad_tilted_moments(lo, hi, z, h, tau):
    """Adaptive-quadrature truncated-Gaussian moments, one element at a time.

    Independent of the erfcx kernels: integrates the standardized density
    directly.  Returns (mean, var, mass) arrays.
    """
    from scipy.integrate import quad

    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    tau = np.broadcast_to(np.asarray(tau, dtype=float), z.shape)
    mean = np.empty_like(z)
    var = np.empty_like(z)
    mass = np.empty_like(z)
    inv_sqrt_2pi = 1.0 / np.sqrt(2.0 * np.pi)
    for i in range(z.size):
        s = 1.0 / np.sqrt(tau[i])
        mu = h[i] / tau[i]
        a = (lo[i] - z[i] - mu) / s
        b = (hi[i] - z[i] - mu) / s
        a = max(a, -40.0)
        b = min(b, 40.0)
        pdf = lambda t: inv_sqrt_2pi * np.exp(-0.5 * t * t)  # noqa: E731
        m0, _ = quad(pdf, a, b, limit=200)
        m1, _ = quad(lambda t: t * pdf(t), a, b, limit=200)
        m2, _ = quad(lambda t: t * t * pdf(t), a, b, limit=200)
        t_mean = m1 / m0
        mean[i] = mu + s * t_mean
        var[i] = s * s * (m2 / m0 - t_mean**2)
        mass[i] = m0
    return mean, var, mass


@dataclass(frozen=True)
class FiniteDiffReport:
    max_rel_error: float
    max_abs_error: float
    n_probes: int

    def ok(self, tol: float) -> bool:
        return self.max_rel_error <= tol


def finite_diff_check(f, grad, probes, step: float = 1e-5, floor: float = 1e-8) -> FiniteDiffReport:
    """Central-difference check of grad against the scalar field f.

    probes is an iterable of points; the per-coordinate relative error is
    |g - fd| / max(|fd|, |g|, floor), so components that vanish on both
    sides cannot blow the ratio up.
    """
    worst_rel = 0.0
    worst_abs = 0.0
    count = 0
    for x0 in probes:
        x0 = np.asarray(x0, dtype=float)
        g = np.asarray(grad(x0), dtype=float)
        fd = np.empty_like(g)
        for i in range(x0.size):
            e = np.zeros_like(x0)
            e[i] = step
            fd[i] = (f(x0 + e) - f(x0 - e)) / (2.0 * step)
        abs_err = np.abs(g - fd)
        rel_err = abs_err / np.maximum(np.maximum(np.abs(fd), np.abs(g)), floor)
        worst_rel = max(worst_rel, float(rel_err.max()))
        worst_abs = max(worst_abs, float(abs_err.max()))
        count += 1
    return FiniteDiffReport(max_rel_error=worst_rel, max_abs_error=worst_abs, n_probes=count)
