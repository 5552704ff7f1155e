"""Annealed Langevin posterior sampler over a decreasing noise ladder.

Each level t uses step size alpha_t = epsilon * beta_t^2 / beta_T^2 and runs
K inner updates x <- x + alpha_t [prior_score + gamma * likelihood_score]
+ sqrt(2 alpha_t) * noise.  gamma is either fixed at 1 or rescaled every
step so that gamma * ||likelihood_score|| = xi * ||prior_score||.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ep import EPConfig, diagonal_baseline_score, likelihood_score
from .priors import PriorScoreModel
from .quantizer import QuantizerSpec
from .sensing import MeasurementModel

__all__ = [
    "NoiseSchedule",
    "SamplerConfig",
    "ChainResult",
    "ChainFailure",
    "NonFiniteScoreError",
    "make_geometric_schedule",
    "run_chain",
    "run_batch",
]

ALGOS = ("plus", "baseline")
GAMMA_MODES = ("fixed_one", "scaled")


class NonFiniteScoreError(RuntimeError):
    """A score evaluation produced NaN or infinity; the chain aborts cleanly."""


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    betas: np.ndarray

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("schedule needs at least one level")
        if np.any(betas <= 0) or np.any(np.diff(betas) >= 0):
            raise ValueError("betas must be strictly decreasing and positive")
        object.__setattr__(self, "betas", betas)

    @property
    def t_levels(self) -> int:
        return self.betas.size


def make_geometric_schedule(beta_max: float, beta_min: float, t_levels: int) -> NoiseSchedule:
    """Geometric ladder beta_max = b_1 > ... > b_T = beta_min."""
    if not (beta_max > beta_min > 0):
        raise ValueError(f"need beta_max > beta_min > 0, got {beta_max}, {beta_min}")
    if t_levels < 2:
        raise ValueError("t_levels must be >= 2")
    grid = np.arange(t_levels) / (t_levels - 1)
    return NoiseSchedule(betas=beta_max * (beta_min / beta_max) ** grid)


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.002
    k_inner: int = 5
    gamma_mode: str = "fixed_one"
    xi: float = 0.5
    iter_ep: int = 5
    seed: int = 0
    algo: str = "plus"
    init_range: tuple = (0.0, 1.0)
    warm_start: bool = False
    ep_damping: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0 or self.xi <= 0 or self.k_inner < 1:
            raise ValueError("epsilon, xi must be positive and k_inner >= 1")
        if self.gamma_mode not in GAMMA_MODES:
            raise ValueError(f"gamma_mode must be one of {GAMMA_MODES}")
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}")

    def ep_config(self) -> EPConfig:
        return EPConfig(iter_ep=self.iter_ep, damping=self.ep_damping, warm_start=self.warm_start)


@dataclass(eq=False)
class ChainResult:
    x_hat: np.ndarray
    seed: tuple
    alphas: np.ndarray            # (T,)
    prior_score_norms: np.ndarray  # (T, K)
    lik_score_norms: np.ndarray    # (T, K)
    gammas: np.ndarray             # (T, K)
    ep_clamps: np.ndarray          # (T, K)
    gamma_fallbacks: int = 0


@dataclass(frozen=True)
class ChainFailure:
    chain_index: int
    error: str


def run_chain(
    model: MeasurementModel,
    quantizer: QuantizerSpec,
    y,
    prior: PriorScoreModel,
    schedule: NoiseSchedule,
    config: SamplerConfig = SamplerConfig(),
    chain_index: int = 0,
) -> ChainResult:
    """One Markov chain; deterministic given (inputs, config.seed, chain_index)."""
    rng = np.random.default_rng([config.seed, chain_index])
    n = model.n
    betas = schedule.betas
    t_levels = betas.size
    k = config.k_inner
    ep_cfg = config.ep_config()

    x = rng.uniform(config.init_range[0], config.init_range[1], size=n)
    alphas = config.epsilon * (betas / betas[-1]) ** 2
    prior_norms = np.zeros((t_levels, k))
    lik_norms = np.zeros((t_levels, k))
    gammas = np.ones((t_levels, k))
    clamps = np.zeros((t_levels, k), dtype=int)
    fallbacks = 0
    warm = None

    for t, beta in enumerate(betas):
        alpha = alphas[t]
        root = np.sqrt(2.0 * alpha)
        for j in range(k):
            noise = rng.standard_normal(n)
            p_score = np.asarray(prior.score(x, beta), dtype=float)
            if p_score.shape != x.shape or not np.all(np.isfinite(p_score)):
                raise NonFiniteScoreError(f"prior score invalid at level {t}, step {j}")
            if config.algo == "plus":
                l_score, state = likelihood_score(model, beta, x, quantizer, y, ep_cfg, init=warm)
                clamps[t, j] = state.clamp_count
                if config.warm_start:
                    warm = state
            else:
                l_score = diagonal_baseline_score(model, beta, x, quantizer, y)
            if not np.all(np.isfinite(l_score)):
                raise NonFiniteScoreError(f"likelihood score invalid at level {t}, step {j}")

            pn = float(np.linalg.norm(p_score))
            ln = float(np.linalg.norm(l_score))
            if config.gamma_mode == "scaled":
                if ln > 0:
                    gamma = config.xi * pn / ln
                else:
                    gamma = 1.0
                    fallbacks += 1
            else:
                gamma = 1.0

            x = x + alpha * (p_score + gamma * l_score) + root * noise
            prior_norms[t, j] = pn
            lik_norms[t, j] = ln
            gammas[t, j] = gamma
        if config.warm_start:
            warm = None  # levels change beta; restart matching at each level

    return ChainResult(
        x_hat=x,
        seed=(config.seed, chain_index),
        alphas=alphas,
        prior_score_norms=prior_norms,
        lik_score_norms=lik_norms,
        gammas=gammas,
        ep_clamps=clamps,
        gamma_fallbacks=fallbacks,
    )


def _max_workers() -> int:
    env = os.environ.get("QCS_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_batch(
    model: MeasurementModel,
    quantizer: QuantizerSpec,
    y,
    prior: PriorScoreModel,
    schedule: NoiseSchedule,
    config: SamplerConfig = SamplerConfig(),
    n_chains: int = 1,
):
    """Independent seeded chains; results ordered by chain index.

    Per-chain failures are returned in place as ChainFailure without
    cancelling the surviving chains.
    """

    def one(i):
        try:
            return run_chain(model, quantizer, y, prior, schedule, config, chain_index=i)
        except Exception as exc:  # noqa: BLE001 - aggregate, do not cancel siblings
            return ChainFailure(chain_index=i, error=f"{type(exc).__name__}: {exc}")

    workers = min(_max_workers(), n_chains)
    if workers <= 1:
        return [one(i) for i in range(n_chains)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_chains)))
