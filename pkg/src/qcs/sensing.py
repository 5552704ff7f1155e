"""Sensing-matrix ensembles, cached SVD, and measurement simulation.

Three ensembles are supported:

* row_orthogonal: rows form an orthogonal set with equal norms (A A^T = c I).
* ill_conditioned: A = V diag(s) U^T with independent Haar orthogonal factors
  and nonzero singular values in geometric progression, so that
  max(s)/min(nonzero s) equals the requested condition number exactly.
* correlated: A = R1^{1/2} H R2^{1/2} with H i.i.d. standard normal and
  R1, R2 the Toeplitz matrices with entries rho^|i-j|.

The first two ensembles are scaled so ||A||_F^2 = N, keeping per-measurement
signal power comparable across condition numbers; the correlated ensemble is
the literal product construction (rho = 0 gives A = H exactly).
"""

from dataclasses import dataclass

import numpy as np

from .quantizer import QuantizerSpec, quantize

__all__ = [
    "EnsembleSpec",
    "MeasurementModel",
    "generate",
    "simulate",
    "gaussian_covariance_eigs",
    "haar_orthogonal",
    "toeplitz_correlation",
    "spd_sqrt",
]

KINDS = ("row_orthogonal", "ill_conditioned", "correlated")


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    kind: str
    m: int
    n: int
    condition_number: float = 1.0
    correlation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.m <= 0 or self.n <= 0:
            raise ValueError(f"dimensions must be positive, got m={self.m}, n={self.n}")
        if self.condition_number < 1:
            raise ValueError(f"condition_number must be >= 1, got {self.condition_number}")
        if not (0 <= self.correlation < 1):
            raise ValueError(f"correlation must lie in [0, 1), got {self.correlation}")


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Sensing matrix with cached SVD and row norms; immutable after construction."""

    A: np.ndarray
    noise_std: float
    svd_u: np.ndarray       # M x M orthogonal
    svd_s: np.ndarray       # length M, zero-padded when M > N, sorted descending
    svd_v: np.ndarray       # N x min(M, N), thin right factor
    row_norms_sq: np.ndarray

    @classmethod
    def from_matrix(cls, A, noise_std: float = 0.0) -> "MeasurementModel":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError("A must be 2-D")
        if noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {noise_std}")
        m, n = A.shape
        u, s, vt = np.linalg.svd(A, full_matrices=True)
        s_pad = np.zeros(m)
        s_pad[: len(s)] = s
        return cls(
            A=A,
            noise_std=float(noise_std),
            svd_u=u,
            svd_s=s_pad,
            svd_v=vt[: min(m, n)].T,
            row_norms_sq=np.einsum("ij,ij->i", A, A),
        )

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_noise_std(self, noise_std: float) -> "MeasurementModel":
        return MeasurementModel(
            A=self.A,
            noise_std=float(noise_std),
            svd_u=self.svd_u,
            svd_s=self.svd_s,
            svd_v=self.svd_v,
            row_norms_sq=self.row_norms_sq,
        )


def haar_orthogonal(n: int, rng) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign correction."""
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def toeplitz_correlation(rho: float, n: int) -> np.ndarray:
    """Toeplitz matrix with entries rho^|i-j|."""
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def spd_sqrt(R: np.ndarray) -> np.ndarray:
    """Symmetric square root of an SPD matrix via eigendecomposition."""
    w, q = np.linalg.eigh(R)
    if np.any(w <= 0):
        raise ValueError("matrix is not positive definite")
    return (q * np.sqrt(w)) @ q.T


def _geometric_singular_values(m: int, n: int, kappa: float) -> np.ndarray:
    r = min(m, n)
    if kappa == 1 or r == 1:
        s = np.ones(r)
    else:
        ratio = kappa ** (1.0 / (r - 1))  # max/min over r values equals kappa exactly
        s = ratio ** (-np.arange(r, dtype=float))
    return s * np.sqrt(n / np.sum(s * s))


def generate(spec: EnsembleSpec, noise_std: float = 0.0) -> MeasurementModel:
    """Draw a sensing matrix from the requested ensemble; pure given (spec, seed)."""
    rng = np.random.default_rng(spec.seed)
    m, n = spec.m, spec.n
    if spec.kind == "row_orthogonal":
        if m > n:
            raise ValueError("row_orthogonal requires m <= n")
        A = haar_orthogonal(n, rng)[:m] * np.sqrt(n / m)
    elif spec.kind == "ill_conditioned":
        s = _geometric_singular_values(m, n, spec.condition_number)
        V = haar_orthogonal(m, rng)
        U = haar_orthogonal(n, rng)
        A = (V[:, : len(s)] * s) @ U[:, : len(s)].T
    else:  # correlated
        H = rng.standard_normal((m, n))
        A = H
        if spec.correlation > 0:
            RL = spd_sqrt(toeplitz_correlation(spec.correlation, m))
            RR = spd_sqrt(toeplitz_correlation(spec.correlation, n))
            A = RL @ H @ RR
    return MeasurementModel.from_matrix(A, noise_std=noise_std)


def simulate(model: MeasurementModel, spec: QuantizerSpec, x, seed=None):
    """Forward model: returns (y, z_clean) with y the quantized noisy measurements."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"x must have shape ({model.n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    z_clean = model.A @ x
    v = z_clean
    if model.noise_std > 0:
        rng = np.random.default_rng(seed)
        v = z_clean + model.noise_std * rng.standard_normal(model.m)
    return quantize(spec, v), z_clean


def gaussian_covariance_eigs(model: MeasurementModel, beta: float) -> np.ndarray:
    """Eigenvalues sigma^2 + beta^2 s_i^2 of the perturbed-measurement covariance."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    return model.noise_std**2 + beta**2 * model.svd_s**2
