"""Reconstruction quality metrics: MSE, PSNR, single-scale SSIM."""

import numpy as np
from scipy.ndimage import convolve1d

__all__ = ["mse", "psnr", "ssim"]


def mse(x_hat, x_true) -> float:
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape:
        raise ValueError(f"shape mismatch: {x_hat.shape} vs {x_true.shape}")
    return float(np.mean((x_hat - x_true) ** 2))


def psnr(x_hat, x_true, data_range: float = 1.0) -> float:
    """10 log10(data_range^2 / MSE) in dB; +inf for an exact match."""
    if data_range <= 0:
        raise ValueError("data_range must be positive")
    err = mse(x_hat, x_true)
    if err == 0:
        return float("inf")
    return float(10.0 * np.log10(data_range**2 / err))


def _gaussian_window(size=11, sigma=1.5):
    t = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-0.5 * (t / sigma) ** 2)
    return w / w.sum()


def _filter2(img, w):
    out = convolve1d(img, w, axis=0, mode="constant")
    out = convolve1d(out, w, axis=1, mode="constant")
    pad = (len(w) - 1) // 2
    return out[pad:-pad, pad:-pad]


def _ssim_plane(a, b, data_range, win):
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    mu_a = _filter2(a, win)
    mu_b = _filter2(b, win)
    saa = _filter2(a * a, win) - mu_a * mu_a
    sbb = _filter2(b * b, win) - mu_b * mu_b
    sab = _filter2(a * b, win) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (saa + sbb + c2)
    return float(np.mean(num / den))


def ssim(x_hat, x_true, image_dims, data_range: float = 1.0) -> float:
    """Single-scale SSIM with an 11x11 Gaussian window (sd 1.5).

    image_dims is (H, W) or (H, W, C); multi-channel images are scored per
    channel and averaged.  The mean map uses the valid interior only, so
    both sides need H, W >= 11.
    """
    dims = tuple(int(d) for d in image_dims)
    if len(dims) not in (2, 3):
        raise ValueError("image_dims must be (H, W) or (H, W, C)")
    a = np.asarray(x_hat, dtype=float).reshape(dims)
    b = np.asarray(x_true, dtype=float).reshape(dims)
    win = _gaussian_window()
    if dims[0] < len(win) or dims[1] < len(win):
        raise ValueError(f"image sides must be >= {len(win)}, got {dims[:2]}")
    if len(dims) == 2:
        return _ssim_plane(a, b, data_range, win)
    return float(np.mean([_ssim_plane(a[..., c], b[..., c], data_range, win) for c in range(dims[2])]))
