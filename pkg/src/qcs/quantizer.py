"""Element-wise uniform quantizer: codewords, threshold intervals, forward map.

A Q-bit uniform quantizer partitions the real line into 2^Q half-open bins
[l_r, u_r).  The two outer bins are unbounded (saturating); the interior
bins have equal width 2*saturation / 2^Q.  The 1-bit quantizer is the sign
map with codewords {-1, +1} and threshold 0.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuantizerSpec", "make_uniform", "make_sign", "quantize", "interval_of", "intervals_for"]


@dataclass(frozen=True, eq=False)
class QuantizerSpec:
    """Codeword set and threshold intervals of an element-wise quantizer.

    codewords[r] labels the bin [lower[r], upper[r]); lower[0] = -inf and
    upper[-1] = +inf, and upper[r] == lower[r+1] so the bins partition R.
    """

    bits: int
    codewords: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    saturation: float
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        n = 2**self.bits
        if not (len(self.codewords) == len(self.lower) == len(self.upper) == n):
            raise ValueError("codewords/lower/upper must all have length 2^bits")
        if not (np.isneginf(self.lower[0]) and np.isposinf(self.upper[-1])):
            raise ValueError("outer bins must be unbounded")
        if not np.array_equal(self.upper[:-1], self.lower[1:]):
            raise ValueError("bins must tile the real line: upper[r] == lower[r+1]")
        object.__setattr__(self, "_index", {float(q): r for r, q in enumerate(self.codewords)})

    @property
    def n_codewords(self) -> int:
        return 2**self.bits

    @property
    def interior_width(self) -> float:
        return 2.0 * self.saturation / 2**self.bits


def make_sign() -> QuantizerSpec:
    """1-bit sign quantizer: codewords {-1, +1}, threshold at 0."""
    return QuantizerSpec(
        bits=1,
        codewords=np.array([-1.0, 1.0]),
        lower=np.array([-np.inf, 0.0]),
        upper=np.array([0.0, np.inf]),
        saturation=1.0,
    )


def make_uniform(bits: int, saturation: float) -> QuantizerSpec:
    """Uniform quantizer with 2^bits bins saturating at +-saturation.

    Interior thresholds sit at -saturation + k * width for k = 1 .. 2^bits - 1,
    width = 2*saturation/2^bits.  Codeword labels are the bin midpoints
    (outer bins use the midpoint of the adjacent saturated cell).  bits = 1
    collapses to the sign quantizer regardless of saturation.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if not np.isfinite(saturation) or saturation <= 0:
        raise ValueError(f"saturation must be finite and positive, got {saturation}")
    if bits == 1:
        return make_sign()
    n = 2**bits
    width = 2.0 * saturation / n
    edges = -saturation + width * np.arange(n + 1)  # edges[0] == -saturation
    lower = np.concatenate(([-np.inf], edges[1:-1]))
    upper = np.concatenate((edges[1:-1], [np.inf]))
    codewords = -saturation + width * (np.arange(n) + 0.5)
    return QuantizerSpec(bits=bits, codewords=codewords, lower=lower, upper=upper, saturation=float(saturation))


def quantize(spec: QuantizerSpec, v) -> np.ndarray:
    """Map each element of v to the codeword of its bin [l, u)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("quantize requires finite input")
    # side='right' counts thresholds <= v, giving [l, u) bins
    thresholds = spec.lower[1:]
    idx = np.searchsorted(thresholds, v, side="right")
    return spec.codewords[idx]


def interval_of(spec: QuantizerSpec, codeword: float) -> tuple[float, float]:
    """Thresholds (l, u) of the bin labelled by a codeword; l or u may be infinite."""
    r = spec._index.get(float(codeword))
    if r is None:
        raise KeyError(f"unknown codeword {codeword!r}")
    return float(spec.lower[r]), float(spec.upper[r])


def intervals_for(spec: QuantizerSpec, y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized interval_of: bounds (lo, hi) for a whole codeword vector."""
    y = np.asarray(y, dtype=float)
    idx = np.searchsorted(spec.codewords, y)
    idx = np.clip(idx, 0, spec.n_codewords - 1)
    if not np.array_equal(spec.codewords[idx], y):
        bad = y[spec.codewords[idx] != y]
        raise KeyError(f"unknown codeword(s) {np.unique(bad)!r}")
    return spec.lower[idx].copy(), spec.upper[idx].copy()
