"""Pixel and latent-space similarity metrics."""

from __future__ import annotations

import numpy as np

from ..codec import Codec, CodecMode

PSNR_CAP = 100.0


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) with dynamic range 1.0, capped at 100 dB."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP)


def psnr_per_frame(a: np.ndarray, b: np.ndarray) -> list[float]:
    return [psnr(a[t], b[t]) for t in range(a.shape[0])]


def _box_mean(img: np.ndarray, k: int) -> np.ndarray:
    """Valid-window uniform k x k mean via 2D cumulative sums."""
    c = np.cumsum(np.cumsum(img, axis=0, dtype=np.float64), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    return (c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]) / (k * k)


def ssim_frame(x: np.ndarray, y: np.ndarray, window: int = 7,
               K1: float = 0.01, K2: float = 0.03) -> float:
    """Mean windowed SSIM of one single-channel frame pair, valid windows only."""
    if x.shape[0] < window or x.shape[1] < window:
        raise ValueError(f"frame {x.shape} smaller than window {window}")
    L = 1.0
    C1 = (K1 * L) ** 2
    C2 = (K2 * L) ** 2
    x = np.asarray(x, np.float64)
    y = np.asarray(y, np.float64)
    mx = _box_mean(x, window)
    my = _box_mean(y, window)
    sxx = _box_mean(x * x, window) - mx * mx
    syy = _box_mean(y * y, window) - my * my
    sxy = _box_mean(x * y, window) - mx * my
    num = (2 * mx * my + C1) * (2 * sxy + C2)
    den = (mx * mx + my * my + C1) * (sxx + syy + C2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray, window: int = 7,
         K1: float = 0.01, K2: float = 0.03) -> float:
    """Mean over frames and channels of windowed SSIM for (F,H,W,3) videos."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    vals = [
        ssim_frame(a[t, :, :, ch], b[t, :, :, ch], window, K1, K2)
        for t in range(a.shape[0])
        for ch in range(a.shape[-1])
    ]
    return float(np.mean(vals))


def perceptual_distance(a: np.ndarray, b: np.ndarray, codec: Codec) -> float:
    """Mean squared distance between learned encoder latents; LPIPS stand-in."""
    if codec.config.mode is not CodecMode.LEARNED:
        raise ValueError("perceptual distance needs a LEARNED codec (no features in PATCHIFY)")
    za = codec.encode(a)
    zb = codec.encode(b)
    return float(np.mean((za - zb) ** 2))


def frame_perceptual_distance(fa: np.ndarray, fb: np.ndarray, codec: Codec) -> float:
    """Single-frame variant: each frame is tiled to the codec's temporal ratio."""
    r = codec.config.temporal_ratio
    va = np.broadcast_to(fa, (r, *fa.shape)).copy()
    vb = np.broadcast_to(fb, (r, *fb.shape)).copy()
    return perceptual_distance(va, vb, codec)
