"""Action-label probe: a small video classifier used as the semantic metric.

The probe embeds a video and each label into a shared space; semantic
similarity is the cosine between the video embedding and the label embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from ..common import TrainLog, TrainingDiverged
from ..container import load_container, save_container

PROBE_MAGIC = b"HSPB"
PROBE_VERSION = 1
_EMBED_DIM = 32
_LOGIT_SCALE = 10.0


class VideoProbe(nn.Module):
    def __init__(self, label_vocab: int, embed_dim: int = _EMBED_DIM):
        super().__init__()
        self.label_vocab = label_vocab
        self.net = nn.Sequential(
            nn.Conv3d(3, 16, 3, stride=(1, 2, 2), padding=1),
            nn.GELU(),
            nn.Conv3d(16, 32, 3, stride=(2, 2, 2), padding=1),
            nn.GELU(),
            nn.Conv3d(32, 64, 3, stride=(2, 2, 2), padding=1),
            nn.GELU(),
            nn.AdaptiveAvgPool3d(1),
            nn.Flatten(),
            nn.Linear(64, embed_dim),
        )
        self.label_embed = nn.Embedding(label_vocab, embed_dim)

    def embed(self, videos: torch.Tensor) -> torch.Tensor:
        emb = self.net(videos)
        return emb / emb.norm(dim=-1, keepdim=True).clamp_min(1e-8)

    def logits(self, videos: torch.Tensor) -> torch.Tensor:
        emb = self.embed(videos)
        lab = self.label_embed.weight
        lab = lab / lab.norm(dim=-1, keepdim=True).clamp_min(1e-8)
        return _LOGIT_SCALE * emb @ lab.T


def _to_batch(videos: list[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.stack(videos)).permute(0, 4, 1, 2, 3)  # (B,3,F,H,W)


@dataclass
class ProbeTrainConfig:
    steps: int = 600
    batch_size: int = 8
    lr: float = 1e-3
    seed: int = 0
    log_path: str | None = None


def train_probe(videos: list[np.ndarray], labels: list[int], label_vocab: int,
                hp: ProbeTrainConfig | None = None) -> tuple[VideoProbe, TrainLog]:
    hp = hp or ProbeTrainConfig()
    torch.manual_seed(hp.seed)
    gen = torch.Generator().manual_seed(hp.seed)
    probe = VideoProbe(label_vocab)
    opt = torch.optim.Adam(probe.parameters(), lr=hp.lr)
    data = _to_batch(videos)
    targets = torch.tensor(labels, dtype=torch.long)
    log = TrainLog(hp.log_path)

    probe.train()
    for step in range(hp.steps):
        idx = torch.randint(0, data.shape[0], (hp.batch_size,), generator=gen)
        loss = nn.functional.cross_entropy(probe.logits(data[idx]), targets[idx])
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"probe loss non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append(step, loss.item(), hp.lr)
    probe.eval()
    return probe, log


def semantic_similarity(probe: VideoProbe, video: np.ndarray, label: int) -> float:
    """Cosine between the probe's video embedding and one label embedding."""
    if not (0 <= label < probe.label_vocab):
        raise ValueError(f"unknown label {label}")
    with torch.no_grad():
        emb = probe.embed(_to_batch([video.astype(np.float32)]))[0]
        lab = probe.label_embed.weight[label]
        lab = lab / lab.norm().clamp_min(1e-8)
    return float(emb @ lab)


def classify(probe: VideoProbe, video: np.ndarray) -> int:
    with torch.no_grad():
        return int(probe.logits(_to_batch([video.astype(np.float32)]))[0].argmax())


def save_probe(probe: VideoProbe, path) -> None:
    tensors = {k: v.detach().numpy().astype(np.float32)
               for k, v in probe.state_dict().items()}
    save_container(path, PROBE_MAGIC, PROBE_VERSION,
                   f"label_vocab {probe.label_vocab}", tensors)


def load_probe(path) -> VideoProbe:
    config_text, tensors = load_container(path, PROBE_MAGIC, PROBE_VERSION)
    vocab = int(config_text.split()[1])
    probe = VideoProbe(vocab)
    probe.load_state_dict({k: torch.from_numpy(v) for k, v in tensors.items()})
    probe.eval()
    return probe
