"""Conditioning assembly: bundles, mask sampling, and batch construction."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import torch

from ..codec import Codec


class ConditioningMode(Enum):
    MESH_RENDER = "mesh_render"        # hand sprite video latent, pixel-aligned
    MASK = "mask"                      # binary silhouette video latent
    MODULATE_GLOBAL = "modulate_global"    # pooled pose params via modulation
    MODULATE_PERFRAME = "modulate_perframe"  # per-latent-frame pose params

    @property
    def uses_hand_latent(self) -> bool:
        return self in (ConditioningMode.MESH_RENDER, ConditioningMode.MASK)


NULL_LABEL = -1  # sentinel; mapped to the trailing embedding row inside the model


@dataclass
class ConditioningBundle:
    c_s: np.ndarray                      # (f,c,h,w) static-scene latent
    c_h: Optional[np.ndarray]            # (f,c,h,w) hand latent, or None
    mask: np.ndarray                     # (f,1,h,w) binary, 1 = known
    hand_params: Optional[np.ndarray]    # (F,4), or None
    label: int                           # class id or NULL_LABEL

    def validate(self, mode: ConditioningMode) -> None:
        if mode.uses_hand_latent:
            if self.c_h is None or self.hand_params is not None:
                raise ValueError(f"mode {mode.value} requires c_h and no hand_params")
            if self.c_h.shape != self.c_s.shape:
                raise ValueError("c_h / c_s latent shapes differ")
        else:
            if self.hand_params is None or self.c_h is not None:
                raise ValueError(f"mode {mode.value} requires hand_params and no c_h")
        if self.mask.shape != (self.c_s.shape[0], 1, *self.c_s.shape[2:]):
            raise ValueError(f"mask shape {self.mask.shape} inconsistent with latent")

    def channel_stack(self) -> np.ndarray:
        """(f, 2c+1, h, w): [c_s, c_h or zeros, mask] in fixed channel order."""
        c_h = self.c_h if self.c_h is not None else np.zeros_like(self.c_s)
        return np.concatenate([self.c_s, c_h, self.mask], axis=1).astype(np.float32)


def full_mask(latent_shape: tuple[int, int, int, int]) -> np.ndarray:
    f, _, h, w = latent_shape
    return np.ones((f, 1, h, w), dtype=np.float32)


def first_frame_mask(latent_shape: tuple[int, int, int, int]) -> np.ndarray:
    m = np.zeros((latent_shape[0], 1, *latent_shape[2:]), dtype=np.float32)
    m[0] = 1.0
    return m


def sample_box_mask(rng: np.random.Generator, latent_shape: tuple[int, int, int, int],
                    full_prob: float = 0.1, max_boxes: int = 3) -> np.ndarray:
    """Random unknown spatiotemporal boxes; with `full_prob`, everything known."""
    f, _, h, w = latent_shape
    mask = np.ones((f, 1, h, w), dtype=np.float32)
    if rng.random() < full_prob:
        return mask
    for _ in range(int(rng.integers(1, max_boxes + 1))):
        ft = int(rng.integers(1, f + 1))
        bh = int(rng.integers(max(1, h // 4), h + 1))
        bw = int(rng.integers(max(1, w // 4), w + 1))
        t0 = int(rng.integers(0, f - ft + 1))
        y0 = int(rng.integers(0, h - bh + 1))
        x0 = int(rng.integers(0, w - bw + 1))
        mask[t0 : t0 + ft, :, y0 : y0 + bh, x0 : x0 + bw] = 0.0
    return mask


def upsample_mask_to_pixels(mask: np.ndarray, codec: Codec, F: int, H: int, W: int) -> np.ndarray:
    """(f,1,h,w) latent-grid mask -> (F,H,W,1) pixel mask by nearest replication."""
    r = codec.config.temporal_ratio
    s = codec.config.spatial_ratio
    m = np.repeat(mask[:, 0], r, axis=0)
    m = np.repeat(np.repeat(m, s, axis=1), s, axis=2)
    return m[:F, :H, :W, None]


def make_inpaint_bundle(video: np.ndarray, codec: Codec,
                        mask: np.ndarray) -> tuple[np.ndarray, ConditioningBundle]:
    """Inpainting task: condition on the masked video; target is the original."""
    z0 = codec.encode(video)
    pixel_mask = upsample_mask_to_pixels(mask, codec, *video.shape[:3])
    c_s = codec.encode(video * pixel_mask)
    bundle = ConditioningBundle(c_s=c_s, c_h=np.zeros_like(c_s), mask=mask,
                                hand_params=None, label=NULL_LABEL)
    return z0, bundle


def make_i2v_bundle(video: np.ndarray, codec: Codec) -> tuple[np.ndarray, ConditioningBundle]:
    """First-frame-to-video task: condition on frame 0 repeated across time."""
    z0 = codec.encode(video)
    repeated = np.broadcast_to(video[0], video.shape).copy()
    c_s = codec.encode(repeated)
    bundle = ConditioningBundle(c_s=c_s, c_h=np.zeros_like(c_s),
                                mask=first_frame_mask(z0.shape),
                                hand_params=None, label=NULL_LABEL)
    return z0, bundle


def make_finetune_bundle(record, codec: Codec,
                         mode: ConditioningMode) -> tuple[np.ndarray, ConditioningBundle]:
    """Residual-dynamics task: static latent + hand conditioning, full-ones mask."""
    z0 = codec.encode(record.interaction)
    c_s = codec.encode(record.static)
    c_h = None
    hand_params = None
    if mode is ConditioningMode.MESH_RENDER:
        c_h = codec.encode(record.hand)
    elif mode is ConditioningMode.MASK:
        c_h = codec.encode(record.hand_mask)
    else:
        hand_params = record.hand_params.astype(np.float32)
    bundle = ConditioningBundle(c_s=c_s, c_h=c_h, mask=full_mask(z0.shape),
                                hand_params=hand_params, label=record.label)
    bundle.validate(mode)
    return z0, bundle


def adapt_bundle_for_mode(bundle: ConditioningBundle, mode: ConditioningMode,
                          num_frames: int) -> ConditioningBundle:
    """Make a hand-free bundle (pretraining) conform to a modulation-mode model
    by moving the empty hand signal into zero pose parameters."""
    from dataclasses import replace

    if mode.uses_hand_latent:
        return bundle
    return replace(bundle, c_h=None,
                   hand_params=np.zeros((num_frames, 4), dtype=np.float32))


def collate_bundles(z0s: list[np.ndarray], bundles: list[ConditioningBundle],
                    label_vocab: int) -> dict[str, torch.Tensor | None]:
    """Stack a batch into torch tensors; NULL labels map to index `label_vocab`."""
    z0 = torch.from_numpy(np.stack(z0s))
    cond = torch.from_numpy(np.stack([b.channel_stack() for b in bundles]))
    labels = torch.tensor(
        [label_vocab if b.label == NULL_LABEL else b.label for b in bundles],
        dtype=torch.long,
    )
    if bundles[0].hand_params is not None:
        hand_params = torch.from_numpy(np.stack([b.hand_params for b in bundles]))
    else:
        hand_params = None
    return {"z0": z0, "cond_channels": cond, "label": labels, "hand_params": hand_params}
