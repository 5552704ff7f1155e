"""Pluggable prior-score models s(x, beta) ~ grad_x log p_beta(x).

p_beta is the prior convolved with N(0, beta^2 I) (variance-exploding
perturbation).  Two analytic desk-scale priors make the sampler testable
end to end without a learned model; learned models are reached through the
bridge client (see bridge_client).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = ["PriorScoreModel", "GaussianPrior", "GMMPrior", "gaussian_score", "gmm_score"]


class PriorScoreModel(ABC):
    """Interface the sampler consumes: a score field over (x, beta)."""

    @property
    @abstractmethod
    def dimension(self) -> int: ...

    @abstractmethod
    def score(self, x: np.ndarray, beta: float) -> np.ndarray:
        """grad_x log p_beta(x); finite output for finite input, same length."""

    #: inclusive range of perturbation scales the model supports
    beta_range: tuple = (0.0, np.inf)


@dataclass(frozen=True, eq=False)
class GaussianPrior(PriorScoreModel):
    """N(mean, cov) prior; the smoothed density stays Gaussian, so the score
    is exact through the cached eigenbasis of cov."""

    mean: np.ndarray
    cov: np.ndarray
    _eigvals: np.ndarray = field(init=False, repr=False)
    _eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        w, q = np.linalg.eigh(cov)
        if np.any(w <= 0):
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_eigvals", w)
        object.__setattr__(self, "_eigvecs", q)

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]

    def score(self, x, beta: float) -> np.ndarray:
        return gaussian_score(self, x, beta)

    def sample(self, rng, size=None) -> np.ndarray:
        g = rng.standard_normal(self.dimension if size is None else (size, self.dimension))
        return self.mean + g * np.sqrt(self._eigvals) @ self._eigvecs.T

    def posterior_given_linear(self, A, y_lin, noise_std):
        """Exact Gaussian posterior (mean, cov) for unquantized y = Ax + n."""
        prec0 = (self._eigvecs / self._eigvals) @ self._eigvecs.T
        prec = prec0 + (A.T @ A) / noise_std**2
        cov = np.linalg.inv(prec)
        mean = cov @ (prec0 @ self.mean + A.T @ y_lin / noise_std**2)
        return mean, cov


def gaussian_score(prior: GaussianPrior, x, beta: float) -> np.ndarray:
    """-(cov + beta^2 I)^{-1} (x - mean), via the cached eigenbasis."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    x = np.asarray(x, dtype=float)
    q, w = prior._eigvecs, prior._eigvals
    return -(q @ ((q.T @ (x - prior.mean)) / (w + beta**2)))


@dataclass(frozen=True, eq=False)
class GMMPrior(PriorScoreModel):
    """Mixture of K isotropic Gaussians: weights w_k, means mu_k, variances v_k."""

    weights: np.ndarray
    means: np.ndarray      # K x N
    variances: np.ndarray  # K

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        v = np.asarray(self.variances, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if np.any(v <= 0):
            raise ValueError("variances must be positive")
        if not (len(w) == mu.shape[0] == len(v)):
            raise ValueError("weights, means, variances must agree on K")
        object.__setattr__(self, "weights", w / w.sum())
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", v)

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    def score(self, x, beta: float) -> np.ndarray:
        return gmm_score(self, x, beta)

    def sample(self, rng, size=None) -> np.ndarray:
        one = size is None
        k = rng.choice(self.n_components, size=1 if one else size, p=self.weights)
        g = rng.standard_normal((len(k), self.dimension))
        out = self.means[k] + g * np.sqrt(self.variances[k])[:, None]
        return out[0] if one else out

    def log_density(self, x, beta: float) -> float:
        x = np.asarray(x, dtype=float)
        var = self.variances + beta**2
        d2 = np.sum((x[None, :] - self.means) ** 2, axis=1)
        n = self.dimension
        logp_k = -0.5 * d2 / var - 0.5 * n * np.log(2 * np.pi * var) + np.log(self.weights)
        return float(logsumexp(logp_k))


def gmm_score(prior: GMMPrior, x, beta: float) -> np.ndarray:
    """Exact smoothed-mixture score with log-sum-exp-stable responsibilities."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    x = np.asarray(x, dtype=float)
    var = prior.variances + beta**2
    diff = x[None, :] - prior.means
    d2 = np.einsum("kn,kn->k", diff, diff)
    n = prior.dimension
    logp_k = -0.5 * d2 / var - 0.5 * n * np.log(2 * np.pi * var) + np.log(prior.weights)
    resp = np.exp(logp_k - logsumexp(logp_k))
    return -(resp / var) @ diff
