"""Pure-NumPy backend for the tilted (interval-truncated) Gaussian kernels.

Given interval bounds [lo, hi), a point z and natural parameters (h, tau),
the tilted density over the noise variable w is

    p(w)  propto  1(lo <= z + w < hi) * N(w; h/tau, 1/tau).

This module returns, per element: the tilted mean, the tilted variance,
the score d/dz log Z, and the log interval mass log Z.  All ratios are
computed through erfcx so that both bounds deep in one Gaussian tail
(standardized magnitudes up to ~38) stay finite and accurate.
"""

import numpy as np
from scipy.special import erf, erfc, erfcx

BACKEND = "pure"

_SQRT2 = np.sqrt(2.0)
_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class DegenerateIntervalError(FloatingPointError):
    """The interval mass underflowed to zero even in stabilized form."""


def _phi(t):
    return _INV_SQRT_2PI * np.exp(-0.5 * t * t)


def _interval_ratios(lt, ut):
    """R1 = (phi(lt)-phi(ut))/Z, R2 = (ut*phi(ut)-lt*phi(lt))/Z, logZ for N(0,1) mass on [lt, ut]."""
    lt = np.asarray(lt, dtype=float)
    ut = np.asarray(ut, dtype=float)
    r1 = np.empty_like(lt)
    r2 = np.empty_like(lt)
    logz = np.empty_like(lt)

    lo_inf = np.isneginf(lt)
    hi_inf = np.isposinf(ut)

    sel = lo_inf & hi_inf
    if sel.any():
        r1[sel] = 0.0
        r2[sel] = 0.0
        logz[sel] = 0.0

    # (-inf, b]
    sel = lo_inf & ~hi_inf
    if sel.any():
        b = ut[sel]
        neg = b < 0
        e = erfcx(-b[neg] / _SQRT2)
        r1s = np.empty_like(b)
        r2s = np.empty_like(b)
        lzs = np.empty_like(b)
        r1s[neg] = -_SQRT_2_OVER_PI / e
        r2s[neg] = _SQRT_2_OVER_PI * b[neg] / e
        lzs[neg] = -0.5 * b[neg] ** 2 + np.log(0.5 * e)
        pos = ~neg
        zq = 1.0 - 0.5 * erfc(b[pos] / _SQRT2)
        r1s[pos] = -_phi(b[pos]) / zq
        r2s[pos] = b[pos] * _phi(b[pos]) / zq
        lzs[pos] = np.log(zq)
        r1[sel], r2[sel], logz[sel] = r1s, r2s, lzs

    # [a, inf)
    sel = hi_inf & ~lo_inf
    if sel.any():
        a = lt[sel]
        pos = a > 0
        e = erfcx(a[pos] / _SQRT2)
        r1s = np.empty_like(a)
        r2s = np.empty_like(a)
        lzs = np.empty_like(a)
        r1s[pos] = _SQRT_2_OVER_PI / e
        r2s[pos] = -_SQRT_2_OVER_PI * a[pos] / e
        lzs[pos] = -0.5 * a[pos] ** 2 + np.log(0.5 * e)
        neg = ~pos
        zq = 1.0 - 0.5 * erfc(-a[neg] / _SQRT2)
        r1s[neg] = _phi(a[neg]) / zq
        r2s[neg] = -a[neg] * _phi(a[neg]) / zq
        lzs[neg] = np.log(zq)
        r1[sel], r2[sel], logz[sel] = r1s, r2s, lzs

    # finite two-sided
    sel = ~lo_inf & ~hi_inf
    if sel.any():
        a = lt[sel]
        b = ut[sel]
        r1s = np.empty_like(a)
        r2s = np.empty_like(a)
        lzs = np.empty_like(a)

        right = a >= 0
        if right.any():
            ar, br = a[right], b[right]
            el, eu = erfcx(ar / _SQRT2), erfcx(br / _SQRT2)
            d = np.exp(-0.5 * (br - ar) * (br + ar))
            den = el - d * eu
            r1s[right] = _SQRT_2_OVER_PI * (1.0 - d) / den
            r2s[right] = _SQRT_2_OVER_PI * (br * d - ar) / den
            lzs[right] = -0.5 * ar * ar + np.log(0.5 * den)

        left = b <= 0
        if left.any():
            al, bl = a[left], b[left]
            # mirror of the right-tail branch for (-b, -a)
            el, eu = erfcx(-bl / _SQRT2), erfcx(-al / _SQRT2)
            d = np.exp(-0.5 * (bl - al) * (-bl - al))
            den = el - d * eu
            r1s[left] = -_SQRT_2_OVER_PI * (1.0 - d) / den
            r2s[left] = _SQRT_2_OVER_PI * (bl - al * d) / den
            lzs[left] = -0.5 * bl * bl + np.log(0.5 * den)

        mid = ~right & ~left
        if mid.any():
            am, bm = a[mid], b[mid]
            zq = 0.5 * (erf(bm / _SQRT2) - erf(am / _SQRT2))
            r1s[mid] = (_phi(am) - _phi(bm)) / zq
            r2s[mid] = (bm * _phi(bm) - am * _phi(am)) / zq
            lzs[mid] = np.log(zq)

        r1[sel], r2[sel], logz[sel] = r1s, r2s, lzs

    return r1, r2, logz


def tilted_interval_stats(lo, hi, z, h, tau):
    """Per-element tilted moments, score and log mass.

    Returns (mean, var, score, logz), each length M.  tau is a length-M
    precision vector (callers broadcast scalar precisions).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    z = np.asarray(z, dtype=float)
    h = np.asarray(h, dtype=float)
    tau = np.asarray(tau, dtype=float)

    sqrt_tau = np.sqrt(tau)
    mu = h / tau
    with np.errstate(invalid="ignore"):  # inf - finite stays inf
        lt = sqrt_tau * (lo - z - mu)
        ut = sqrt_tau * (hi - z - mu)

    with np.errstate(divide="ignore", invalid="ignore"):  # degenerates detected below
        r1, r2, logz = _interval_ratios(lt, ut)
    if not np.all(np.isfinite(r1)) or np.any(np.isneginf(logz)):
        bad = int(np.flatnonzero(~np.isfinite(r1) | np.isneginf(logz))[0])
        raise DegenerateIntervalError(
            f"interval mass underflowed at element {bad}: "
            f"standardized bounds ({lt[bad]:.6g}, {ut[bad]:.6g})"
        )
    mean = mu + r1 / sqrt_tau
    var = (1.0 - r2 - r1 * r1) / tau
    if np.any(var <= 0) or not np.all(np.isfinite(var)):
        bad = int(np.flatnonzero((var <= 0) | ~np.isfinite(var))[0])
        raise DegenerateIntervalError(
            f"tilted variance lost all precision at element {bad}: "
            f"standardized bounds ({lt[bad]:.6g}, {ut[bad]:.6g})"
        )
    score = sqrt_tau * r1
    return mean, var, score, logz
