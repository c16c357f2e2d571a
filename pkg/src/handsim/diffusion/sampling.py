"""Deterministic DDIM-style sampling with label-only classifier-free guidance."""

from __future__ import annotations

import numpy as np
import torch

from .conditioning import ConditioningBundle, NULL_LABEL
from .model import Denoiser
from .schedule import NoiseSchedule


def ddim_timesteps(T: int, steps: int) -> list[int]:
    """Strided descending subset of [1, T]."""
    if steps > T:
        raise ValueError(f"steps {steps} exceeds schedule length {T}")
    ts = np.unique(np.linspace(1, T, steps).round().astype(int))[::-1]
    return [int(t) for t in ts]


def _forward(model: Denoiser, z: torch.Tensor, t: int, cond: torch.Tensor,
             label: torch.Tensor, params: torch.Tensor | None) -> torch.Tensor:
    ts = torch.full((z.shape[0],), t, dtype=torch.long)
    return model(z, ts, cond, label, params)


@torch.no_grad()
def sample_batch(model: Denoiser, bundles: list[ConditioningBundle],
                 schedule: NoiseSchedule, steps: int = 50, guidance_scale: float = 1.0,
                 rng: np.random.Generator | None = None,
                 init_noise: np.ndarray | None = None) -> np.ndarray:
    """Denoise a batch of latents; returns (B,f,c,h,w). Deterministic given the
    initial noise (eta = 0); guidance_scale == 1 skips the unconditional pass
    so it is bit-identical to conditional-only sampling."""
    cfg = model.cfg
    for b in bundles:
        b.validate(cfg.conditioning_mode)
    B = len(bundles)
    shape = (B, cfg.latent_frames, cfg.latent_channels, cfg.latent_size, cfg.latent_size)
    if init_noise is None:
        if rng is None:
            raise ValueError("provide rng or init_noise")
        init_noise = rng.standard_normal(shape).astype(np.float32)
    if init_noise.shape != shape:
        raise ValueError(f"init_noise shape {init_noise.shape} != {shape}")

    cond = torch.from_numpy(np.stack([b.channel_stack() for b in bundles]))
    label = torch.tensor([cfg.label_vocab if b.label == NULL_LABEL else b.label
                          for b in bundles], dtype=torch.long)
    null_label = torch.full((B,), cfg.label_vocab, dtype=torch.long)
    params = None
    if bundles[0].hand_params is not None:
        params = torch.from_numpy(np.stack([b.hand_params for b in bundles]))

    model.eval()
    z = torch.from_numpy(init_noise)
    timesteps = ddim_timesteps(schedule.T, steps)
    for i, t in enumerate(timesteps):
        eps = _forward(model, z, t, cond, label, params)
        if guidance_scale != 1.0:
            eps_u = _forward(model, z, t, cond, null_label, params)
            eps = eps_u + guidance_scale * (eps - eps_u)
        ab_t = schedule.ab(t)
        ab_next = schedule.ab(timesteps[i + 1]) if i + 1 < len(timesteps) else 1.0
        x0 = (z - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t)
        z = np.sqrt(ab_next) * x0 + np.sqrt(1.0 - ab_next) * eps
    return z.numpy()


def sample(model: Denoiser, cond: ConditioningBundle, schedule: NoiseSchedule,
           steps: int = 50, guidance_scale: float = 1.0,
           rng: np.random.Generator | None = None,
           init_noise: np.ndarray | None = None) -> np.ndarray:
    """Single-item convenience wrapper; returns an (f,c,h,w) latent."""
    if init_noise is not None:
        init_noise = init_noise[None]
    return sample_batch(model, [cond], schedule, steps, guidance_scale, rng, init_noise)[0]
