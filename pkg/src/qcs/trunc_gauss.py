"""Tilted (interval-truncated) Gaussian moments and per-element score.

These are the measurement-side computations of the likelihood engine: for
each measurement the noise variable is a Gaussian N(h/tau, 1/tau) restricted
to the interval that maps the point z into the observed codeword's bin.
The module exposes the standardized bounds, the matched moments, the score
d/dz of the log interval mass, and a dedicated 1-bit fast path.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .kernels import DegenerateIntervalError, tilted_interval_stats

__all__ = [
    "TiltedInputs",
    "TiltedMoments",
    "DegenerateIntervalError",
    "standardize",
    "moments",
    "score",
    "moments_1bit",
]

_LOG2 = np.log(2.0)
_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class TiltedInputs:
    """Point z, natural parameters (h, tau) and per-element bounds [lower, upper).

    tau may be a positive scalar (shared precision) or a positive length-M
    vector (per-element precisions, used by the diagonal baseline).
    """

    z: np.ndarray
    h: np.ndarray
    tau: "float | np.ndarray"
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        h = np.asarray(self.h, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        m = z.shape[0]
        if not (h.shape == lower.shape == upper.shape == (m,)):
            raise ValueError("z, h, lower, upper must share one length")
        if tau.ndim == 0:
            tau = np.full(m, float(tau))
        elif tau.shape != (m,):
            raise ValueError(f"tau must be scalar or length {m}")
        if np.any(tau <= 0) or not np.all(np.isfinite(tau)):
            raise ValueError("tau must be positive and finite")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(h))):
            raise ValueError("z and h must be finite")
        if np.any(lower >= upper):
            raise ValueError("every interval needs lower < upper")
        for name, val in (("z", z), ("h", h), ("tau", tau), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)

    @property
    def m(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True, eq=False)
class TiltedMoments:
    mean: np.ndarray          # tilted mean per element
    var: float                # 1/M-averaged tilted variance
    score: np.ndarray         # d/dz of the log interval mass
    log_partition: float      # sum over m of log(erfc-difference bracket)
    per_element_var: np.ndarray


def standardize(inputs: TiltedInputs):
    """Standardized interval bounds (u_tilde, l_tilde) of the tilted Gaussian."""
    st = np.sqrt(inputs.tau)
    base = -st * inputs.z - inputs.h / st
    with np.errstate(invalid="ignore"):
        ut = base + inputs.upper * st
        lt = base + inputs.lower * st
    ut[np.isposinf(inputs.upper)] = np.inf
    lt[np.isneginf(inputs.lower)] = -np.inf
    return ut, lt


def moments(inputs: TiltedInputs) -> TiltedMoments:
    """Tilted mean, averaged variance, score and log partition; tail-stable."""
    mean, var, g, logz = tilted_interval_stats(
        inputs.lower, inputs.upper, inputs.z, inputs.h, inputs.tau
    )
    return TiltedMoments(
        mean=mean,
        var=float(np.mean(var)),
        score=g,
        log_partition=float(np.sum(logz) + inputs.m * _LOG2),
        per_element_var=var,
    )


def score(inputs: TiltedInputs) -> np.ndarray:
    """Per-element score, the gradient of log_partition in z at fixed (h, tau)."""
    _, _, g, _ = tilted_interval_stats(inputs.lower, inputs.upper, inputs.z, inputs.h, inputs.tau)
    return g


def moments_1bit(inputs: TiltedInputs, y) -> TiltedMoments:
    """Single-erfc fast path for sign measurements y in {-1, +1}.

    Produces the same values as moments() with intervals (-inf, 0) / [0, inf),
    using the simplified one-threshold expressions.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("moments_1bit requires y in {-1, +1}")
    tau = inputs.tau
    st = np.sqrt(tau)
    mu = inputs.h / tau
    lt = -st * inputs.z - inputs.h / st
    arg = y * lt / _SQRT2
    with np.errstate(over="ignore"):  # erfcx overflows only deep in the satisfied tail
        e = erfcx(arg)
    r = np.where(np.isinf(e), 0.0, np.sqrt(2.0 / np.pi) / e)
    mean = mu + y * r / st
    var = (1.0 + y * lt * r - r * r) / tau
    if np.any(var <= 0):
        raise DegenerateIntervalError("sign-measurement variance lost all precision")
    g = y * st * r
    # log of erfc(y*lt/sqrt(2)) per element, stable in both tails
    logz = np.where(arg > 0, -0.5 * lt * lt + np.log(e), np.log(erfc(arg)))
    return TiltedMoments(
        mean=mean,
        var=float(np.mean(var)),
        score=g,
        log_partition=float(np.sum(logz)),
        per_element_var=var,
    )
