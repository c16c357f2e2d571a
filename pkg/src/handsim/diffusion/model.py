"""Noise-prediction transformer over spatiotemporal latent patch tokens.

The noisy latent is channel-concatenated with the conditioning stack
(static latent, hand latent or zeros, known-mask), patchified per latent
frame, and processed with full self-attention over all f*(h/p)*(w/p)
tokens. Timestep and label enter through adaptive layer modulation;
pose-parameter modes additionally inject pooled or per-frame embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from .conditioning import ConditioningBundle, ConditioningMode, NULL_LABEL


@dataclass(frozen=True)
class DenoiserConfig:
    latent_frames: int = 8
    latent_channels: int = 24
    latent_size: int = 32
    token_patch: int = 4
    model_dim: int = 128
    depth: int = 4
    heads: int = 4
    label_vocab: int = 4
    conditioning_mode: ConditioningMode = ConditioningMode.MESH_RENDER
    label_dropout: float = 0.1

    def __post_init__(self):
        if self.model_dim % self.heads:
            raise ValueError("model_dim must be divisible by heads")
        if self.latent_size % self.token_patch:
            raise ValueError("token_patch must divide the latent grid")
        if not (0.0 <= self.label_dropout <= 1.0):
            raise ValueError("label_dropout must be in [0,1]")

    @property
    def grid(self) -> int:
        return self.latent_size // self.token_patch

    @property
    def tokens(self) -> int:
        return self.latent_frames * self.grid * self.grid

    @property
    def in_channels(self) -> int:
        return 3 * self.latent_channels + 1  # z_t + c_s + c_h/zeros + mask


def timestep_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=torch.float32) / half)
    args = t.float()[:, None] * freqs[None, :].to(t.device)
    return torch.cat([torch.cos(args), torch.sin(args)], dim=-1)


class Block(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim, elementwise_affine=False)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim, elementwise_affine=False)
        self.mlp = nn.Sequential(nn.Linear(dim, dim * 4), nn.GELU(), nn.Linear(dim * 4, dim))
        self.modulation = nn.Sequential(nn.SiLU(), nn.Linear(dim, 6 * dim))
        nn.init.zeros_(self.modulation[1].weight)
        nn.init.zeros_(self.modulation[1].bias)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        # cond is (B, T, dim); per-token modulation supports per-frame injection
        shift1, scale1, gate1, shift2, scale2, gate2 = self.modulation(cond).chunk(6, dim=-1)
        h = self.norm1(x) * (1 + scale1) + shift1
        h, _ = self.attn(h, h, h, need_weights=False)
        x = x + gate1 * h
        h = self.norm2(x) * (1 + scale2) + shift2
        x = x + gate2 * self.mlp(h)
        return x


class Denoiser(nn.Module):
    def __init__(self, cfg: DenoiserConfig):
        super().__init__()
        self.cfg = cfg
        d = cfg.model_dim
        p = cfg.token_patch
        self.patch_embed = nn.Conv2d(cfg.in_channels, d, kernel_size=p, stride=p)
        self.pos_embed = nn.Parameter(torch.zeros(1, cfg.tokens, d))
        nn.init.normal_(self.pos_embed, std=0.02)
        self.time_mlp = nn.Sequential(nn.Linear(d, d), nn.SiLU(), nn.Linear(d, d))
        self.label_embed = nn.Embedding(cfg.label_vocab + 1, d)  # last row = NULL token
        if not cfg.conditioning_mode.uses_hand_latent:
            self.params_mlp = nn.Sequential(nn.Linear(4, d), nn.SiLU(), nn.Linear(d, d))
        self.blocks = nn.ModuleList(Block(d, cfg.heads) for _ in range(cfg.depth))
        self.final_norm = nn.LayerNorm(d, elementwise_affine=False)
        self.final_mod = nn.Sequential(nn.SiLU(), nn.Linear(d, 2 * d))
        self.head = nn.Linear(d, p * p * cfg.latent_channels)
        nn.init.zeros_(self.final_mod[1].weight)
        nn.init.zeros_(self.final_mod[1].bias)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)
        # Time-gated pixelwise linear path. The attention stack normalizes away
        # absolute amplitude, but noise prediction needs t-dependent linear
        # combinations of the raw input channels (the high-t regime is almost
        # exactly eps = a(t)*z_t + b(t)*c_s); two gated branches recover that.
        self.skip = nn.Conv2d(cfg.in_channels, 2 * cfg.latent_channels, kernel_size=1)
        self.skip_mod = nn.Sequential(nn.SiLU(), nn.Linear(d, 2 * cfg.latent_channels))
        nn.init.zeros_(self.skip.weight)
        nn.init.zeros_(self.skip.bias)
        nn.init.zeros_(self.skip_mod[1].weight)
        nn.init.zeros_(self.skip_mod[1].bias)

    def _pose_cond(self, hand_params: torch.Tensor) -> torch.Tensor:
        """(B,F,4) -> per-latent-frame (B,f,dim), mean-pooling groups of F/f."""
        B, F, _ = hand_params.shape
        f = self.cfg.latent_frames
        grouped = hand_params.reshape(B, f, F // f, 4).mean(dim=2)
        return self.params_mlp(grouped)

    def forward(self, z_t: torch.Tensor, t: torch.Tensor, cond_channels: torch.Tensor,
                label: torch.Tensor, hand_params: torch.Tensor | None = None) -> torch.Tensor:
        cfg = self.cfg
        B, f, c, hh, ww = z_t.shape
        if (f, c, hh, ww) != (cfg.latent_frames, cfg.latent_channels, cfg.latent_size, cfg.latent_size):
            raise ValueError(f"latent shape {z_t.shape[1:]} does not match config")
        needs_params = not cfg.conditioning_mode.uses_hand_latent
        if needs_params and hand_params is None:
            raise ValueError(f"mode {cfg.conditioning_mode.value} needs hand_params")
        if not needs_params and hand_params is not None:
            raise ValueError(f"mode {cfg.conditioning_mode.value} forbids hand_params")

        x_in = torch.cat([z_t, cond_channels], dim=2).reshape(B * f, -1, hh, ww)
        x = self.patch_embed(x_in)  # (B*f, d, g, g)
        g = cfg.grid
        x = x.flatten(2).transpose(1, 2).reshape(B, f * g * g, -1)
        x = x + self.pos_embed

        t_emb = timestep_embedding(t, cfg.model_dim).to(z_t.dtype)
        cond_vec = self.time_mlp(t_emb) + self.label_embed(label)
        cond = cond_vec[:, None, :].expand(B, f * g * g, -1)
        if needs_params:
            pose = self._pose_cond(hand_params)  # (B, f, d)
            if cfg.conditioning_mode is ConditioningMode.MODULATE_GLOBAL:
                pose = pose.mean(dim=1, keepdim=True).expand(-1, f, -1)
            cond = cond + pose.repeat_interleave(g * g, dim=1)

        for block in self.blocks:
            x = block(x, cond)
        shift, scale = self.final_mod(cond).chunk(2, dim=-1)
        x = self.final_norm(x) * (1 + scale) + shift
        x = self.head(x)  # (B, T, p*p*c)

        p = cfg.token_patch
        x = x.reshape(B, f, g, g, p, p, cfg.latent_channels)
        x = x.permute(0, 1, 6, 2, 4, 3, 5)  # (B, f, c, g, p, g, p)
        out = x.reshape(B, f, cfg.latent_channels, hh, ww)

        u, v = self.skip(x_in).reshape(B, f, 2 * c, hh, ww).chunk(2, dim=2)
        g1, g2 = self.skip_mod(cond_vec).reshape(B, 1, 2 * c, 1, 1).chunk(2, dim=2)
        return out + (1 + g1) * u + (1 + g2) * v


def predict_noise(model: Denoiser, z_t: np.ndarray, t: int,
                  cond: ConditioningBundle) -> np.ndarray:
    """Single-item numpy surface over the batched torch forward pass."""
    cfg = model.cfg
    cond.validate(cfg.conditioning_mode)
    zt = torch.from_numpy(np.asarray(z_t, dtype=np.float32))[None]
    channels = torch.from_numpy(cond.channel_stack())[None]
    label = torch.tensor([cfg.label_vocab if cond.label == NULL_LABEL else cond.label])
    params = None
    if cond.hand_params is not None:
        params = torch.from_numpy(cond.hand_params)[None]
    with torch.no_grad():
        eps = model(zt, torch.tensor([t]), channels, label, params)
    return eps[0].numpy()
