"""Posterior-sampling reconstruction from coarsely quantized linear measurements.

Reconstructs a signal x from y = Q(Ax + n) for general (ill-conditioned,
correlated) sensing matrices: annealed Langevin dynamics over a noise
ladder, with the intractable measurement term handled by a moment-matching
surrogate evaluated through the cached SVD of A.
"""

from .kernels import BACKEND as kernel_backend
from .quantizer import QuantizerSpec, interval_of, intervals_for, make_sign, make_uniform, quantize
from .sensing import EnsembleSpec, MeasurementModel, gaussian_covariance_eigs, generate, simulate
from .trunc_gauss import TiltedInputs, TiltedMoments, moments, moments_1bit, score, standardize
from .ep import (
    EPConfig,
    EPState,
    diagonal_baseline_score,
    ep_fixed_point,
    gaussian_projection,
    likelihood_score,
    pseudo_log_likelihood,
)
from .priors import GaussianPrior, GMMPrior, PriorScoreModel, gaussian_score, gmm_score
from .bridge_client import BridgeClient, RemotePrior, remote_score
from .sampler import (
    ChainFailure,
    ChainResult,
    NoiseSchedule,
    SamplerConfig,
    make_geometric_schedule,
    run_batch,
    run_chain,
)
from .metrics import mse, psnr, ssim
from .oracles import finite_diff_check, mc_posterior_moments, mc_pseudolikelihood, quad_tilted_moments
from .harness import ConfigError, ExperimentConfig, MetricReport, run_experiment
from .qmx import load_qmx, save_qmx

__version__ = "0.1.0"
