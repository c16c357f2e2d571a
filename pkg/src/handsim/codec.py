"""Video <-> latent codecs.

Two modes: PATCHIFY is a lossless space/time-to-channel reshape used to
develop and property-test the diffusion stack without training; LEARNED is a
plain convolutional autoencoder reproducing the compressive setting.
Latents are (f, c, h, w) float32 with f = F/r, h = H/s, w = W/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import torch
import torch.nn as nn
from einops import rearrange

from .common import TrainLog, TrainingDiverged
from .container import load_container, save_container

CODEC_MAGIC = b"HSCD"
CODEC_VERSION = 1


class CodecMode(Enum):
    PATCHIFY = "patchify"
    LEARNED = "learned"


@dataclass(frozen=True)
class CodecConfig:
    temporal_ratio: int = 2
    spatial_ratio: int = 2
    latent_channels: int = 16
    mode: CodecMode = CodecMode.PATCHIFY
    hidden_channels: int = 32  # LEARNED only

    def __post_init__(self):
        if self.temporal_ratio < 1 or self.spatial_ratio < 1:
            raise ValueError("compression ratios must be >= 1")
        if self.mode is CodecMode.PATCHIFY:
            forced = 3 * self.temporal_ratio * self.spatial_ratio**2
            if self.latent_channels != forced:
                object.__setattr__(self, "latent_channels", forced)

    def latent_shape(self, F: int, H: int, W: int) -> tuple[int, int, int, int]:
        self.check_divisible(F, H, W)
        return (F // self.temporal_ratio, self.latent_channels,
                H // self.spatial_ratio, W // self.spatial_ratio)

    def check_divisible(self, F: int, H: int, W: int) -> None:
        if F % self.temporal_ratio or H % self.spatial_ratio or W % self.spatial_ratio:
            raise ValueError(
                f"video shape ({F},{H},{W}) not divisible by ratios "
                f"(r={self.temporal_ratio}, s={self.spatial_ratio})"
            )


class VideoAutoencoder(nn.Module):
    def __init__(self, cfg: CodecConfig):
        super().__init__()
        r, s, c, hid = cfg.temporal_ratio, cfg.spatial_ratio, cfg.latent_channels, cfg.hidden_channels
        self.encoder = nn.Sequential(
            nn.Conv3d(3, hid, 3, padding=1),
            nn.GELU(),
            nn.Conv3d(hid, hid, kernel_size=(r, s, s), stride=(r, s, s)),
            nn.GELU(),
            nn.Conv3d(hid, c, 3, padding=1),
        )
        self.decoder = nn.Sequential(
            nn.Conv3d(c, hid, 3, padding=1),
            nn.GELU(),
            nn.ConvTranspose3d(hid, hid, kernel_size=(r, s, s), stride=(r, s, s)),
            nn.GELU(),
            nn.Conv3d(hid, 3, 3, padding=1),
        )

    def forward(self, video: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encoder(video))


class Codec:
    """Frozen encoder/decoder pair; thread-safe after construction."""

    def __init__(self, config: CodecConfig, module: VideoAutoencoder | None = None):
        if config.mode is CodecMode.LEARNED and module is None:
            module = VideoAutoencoder(config)
        self.config = config
        self.module = module
        if module is not None:
            module.eval()
            for p in module.parameters():
                p.requires_grad_(False)

    # -- PATCHIFY: exact reshapes ------------------------------------------
    def _patchify(self, video: np.ndarray) -> np.ndarray:
        r, s = self.config.temporal_ratio, self.config.spatial_ratio
        return rearrange(video, "(f r) (h s1) (w s2) c -> f (r s1 s2 c) h w", r=r, s1=s, s2=s)

    def _unpatchify(self, latent: np.ndarray) -> np.ndarray:
        r, s = self.config.temporal_ratio, self.config.spatial_ratio
        return rearrange(latent, "f (r s1 s2 c) h w -> (f r) (h s1) (w s2) c", r=r, s1=s, s2=s, c=3)

    # -----------------------------------------------------------------------
    def encode(self, video: np.ndarray) -> np.ndarray:
        """(F,H,W,3) video in [0,1] -> (f,c,h,w) latent. Deterministic."""
        if video.ndim != 4 or video.shape[-1] != 3:
            raise ValueError(f"expected (F,H,W,3) video, got {video.shape}")
        F, H, W = video.shape[:3]
        self.config.check_divisible(F, H, W)
        video = np.asarray(video, dtype=np.float32)
        if self.config.mode is CodecMode.PATCHIFY:
            return np.ascontiguousarray(self._patchify(video))
        with torch.no_grad():
            x = torch.from_numpy(video).permute(3, 0, 1, 2).unsqueeze(0)
            z = self.module.encoder(x)[0]  # (c, f, h, w)
        return z.permute(1, 0, 2, 3).contiguous().numpy()

    def decode(self, latent: np.ndarray) -> np.ndarray:
        """(f,c,h,w) latent -> (F,H,W,3) video; LEARNED output clamped to [0,1]."""
        if latent.ndim != 4 or latent.shape[1] != self.config.latent_channels:
            raise ValueError(f"latent shape {latent.shape} inconsistent with codec config")
        latent = np.asarray(latent, dtype=np.float32)
        if self.config.mode is CodecMode.PATCHIFY:
            return np.ascontiguousarray(self._unpatchify(latent))
        with torch.no_grad():
            z = torch.from_numpy(latent).permute(1, 0, 2, 3).unsqueeze(0)
            x = self.module.decoder(z)[0].clamp(0.0, 1.0)
        return x.permute(1, 2, 3, 0).contiguous().numpy()

    # -- checkpointing ------------------------------------------------------
    def save(self, path) -> None:
        cfg = self.config
        config_text = "\n".join([
            f"mode {cfg.mode.value}",
            f"temporal_ratio {cfg.temporal_ratio}",
            f"spatial_ratio {cfg.spatial_ratio}",
            f"latent_channels {cfg.latent_channels}",
            f"hidden_channels {cfg.hidden_channels}",
        ])
        tensors = {}
        if self.module is not None:
            tensors = {k: v.detach().numpy().astype(np.float32)
                       for k, v in self.module.state_dict().items()}
        save_container(path, CODEC_MAGIC, CODEC_VERSION, config_text, tensors)

    @classmethod
    def load(cls, path) -> "Codec":
        config_text, tensors = load_container(path, CODEC_MAGIC, CODEC_VERSION)
        kv = dict(line.split(None, 1) for line in config_text.strip().splitlines())
        cfg = CodecConfig(
            temporal_ratio=int(kv["temporal_ratio"]),
            spatial_ratio=int(kv["spatial_ratio"]),
            latent_channels=int(kv["latent_channels"]),
            mode=CodecMode(kv["mode"]),
            hidden_channels=int(kv["hidden_channels"]),
        )
        module = None
        if cfg.mode is CodecMode.LEARNED:
            module = VideoAutoencoder(cfg)
            module.load_state_dict({k: torch.from_numpy(v) for k, v in tensors.items()})
        return cls(cfg, module)


@dataclass
class CodecTrainConfig:
    steps: int = 2000
    batch_size: int = 4
    lr: float = 2e-3
    seed: int = 0
    log_path: object = None


def train_codec(videos: list[np.ndarray], config: CodecConfig,
                hp: CodecTrainConfig | None = None) -> tuple[Codec, TrainLog]:
    """Fit the LEARNED autoencoder by pixel MSE; returns a frozen codec."""
    if config.mode is not CodecMode.LEARNED:
        raise ValueError("train_codec requires LEARNED mode")
    hp = hp or CodecTrainConfig()
    F, H, W = videos[0].shape[:3]
    config.check_divisible(F, H, W)

    gen = torch.Generator().manual_seed(hp.seed)
    torch.manual_seed(hp.seed)
    module = VideoAutoencoder(config)
    opt = torch.optim.Adam(module.parameters(), lr=hp.lr)
    data = torch.from_numpy(np.stack(videos)).permute(0, 4, 1, 2, 3)  # (N,3,F,H,W)
    log = TrainLog(hp.log_path)

    module.train()
    for step in range(hp.steps):
        idx = torch.randint(0, data.shape[0], (hp.batch_size,), generator=gen)
        batch = data[idx]
        recon = module(batch)
        loss = torch.mean((recon - batch) ** 2)
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"codec loss non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append(step, loss.item(), hp.lr)
    return Codec(config, module), log
