"""Training loops: inpainting / first-frame pretraining and residual fine-tuning.

All randomness (batch choice, timesteps, noise, label dropout, mask layout)
flows through the TrainState's torch generator, so a checkpoint restores a
bit-identical continuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import torch

from ..codec import Codec
from ..common import TrainLog, TrainingDiverged
from ..container import load_container, save_container
from .conditioning import (
    ConditioningMode,
    adapt_bundle_for_mode,
    collate_bundles,
    make_finetune_bundle,
    make_i2v_bundle,
    make_inpaint_bundle,
    sample_box_mask,
)
from .model import Denoiser, DenoiserConfig
from .schedule import NoiseSchedule, build_schedule

CKPT_MAGIC = b"HSDM"
CKPT_VERSION = 1


@dataclass
class TrainHP:
    steps: int = 1000
    batch_size: int = 4
    lr: float = 2e-4
    grad_clip: float = 1.0
    log_path: object = None


@dataclass
class TrainState:
    model: Denoiser
    optimizer: torch.optim.Adam
    schedule: NoiseSchedule
    generator: torch.Generator
    step: int = 0
    loss_history: list[float] = field(default_factory=list)


def init_train_state(cfg: DenoiserConfig, schedule: NoiseSchedule | None = None,
                     seed: int = 0, lr: float = 2e-4) -> TrainState:
    torch.manual_seed(seed)
    model = Denoiser(cfg)
    gen = torch.Generator().manual_seed(seed + 1)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    return TrainState(model=model, optimizer=opt,
                      schedule=schedule or build_schedule(), generator=gen)


def training_loss(model: Denoiser, batch: dict, schedule: NoiseSchedule,
                  gen: torch.Generator) -> torch.Tensor:
    """Noise-prediction MSE with per-item t, eps, and label dropout."""
    z0 = batch["z0"]
    B = z0.shape[0]
    t = torch.randint(1, schedule.T + 1, (B,), generator=gen)
    eps = torch.randn(z0.shape, generator=gen)
    ab = torch.from_numpy(schedule.alpha_bar).float()[t - 1]
    shape = (B,) + (1,) * (z0.ndim - 1)
    z_t = ab.sqrt().reshape(shape) * z0 + (1 - ab).sqrt().reshape(shape) * eps

    label = batch["label"].clone()
    p_drop = model.cfg.label_dropout
    if p_drop > 0:
        drop = torch.rand(B, generator=gen) < p_drop
        label[drop] = model.cfg.label_vocab
    eps_hat = model(z_t, t, batch["cond_channels"], label, batch["hand_params"])
    return torch.mean((eps - eps_hat) ** 2)


def run_training(state: TrainState, batch_fn: Callable[[torch.Generator], dict],
                 hp: TrainHP) -> TrainLog:
    log = TrainLog(hp.log_path)
    for group in state.optimizer.param_groups:
        group["lr"] = hp.lr
    state.model.train()
    for _ in range(hp.steps):
        batch = batch_fn(state.generator)
        loss = training_loss(state.model, batch, state.schedule, state.generator)
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"loss non-finite at step {state.step}")
        state.optimizer.zero_grad()
        loss.backward()
        if hp.grad_clip:
            torch.nn.utils.clip_grad_norm_(state.model.parameters(), hp.grad_clip)
        state.optimizer.step()
        state.step += 1
        state.loss_history.append(loss.item())
        log.append(state.step, loss.item(), hp.lr)
    state.model.eval()
    return log


def _np_seed(gen: torch.Generator) -> int:
    return int(torch.randint(0, 2**31 - 1, (1,), generator=gen))


def pretrain_inpainting(state: TrainState, videos: Sequence[np.ndarray], codec: Codec,
                        hp: TrainHP, mask_sampler=sample_box_mask,
                        full_mask_prob: float = 0.1) -> TrainLog:
    """Masked-reconstruction pretraining; full-ones masks make it an identity task."""
    cfg = state.model.cfg

    def batch_fn(gen: torch.Generator) -> dict:
        idx = torch.randint(0, len(videos), (hp.batch_size,), generator=gen)
        rng = np.random.default_rng(_np_seed(gen))
        z0s, bundles = [], []
        for i in idx.tolist():
            z_shape = codec.config.latent_shape(*videos[i].shape[:3])
            mask = mask_sampler(rng, z_shape, full_prob=full_mask_prob)
            z0, bundle = make_inpaint_bundle(videos[i], codec, mask)
            z0s.append(z0)
            bundles.append(adapt_bundle_for_mode(bundle, cfg.conditioning_mode,
                                                 videos[i].shape[0]))
        return collate_bundles(z0s, bundles, cfg.label_vocab)

    return run_training(state, batch_fn, hp)


def pretrain_i2v(state: TrainState, videos: Sequence[np.ndarray], codec: Codec,
                 hp: TrainHP) -> TrainLog:
    """First-frame conditioning pretraining (alternative initialization)."""
    cfg = state.model.cfg
    vocab = cfg.label_vocab
    prepared = []
    for v in videos:
        z0, bundle = make_i2v_bundle(v, codec)
        prepared.append((z0, adapt_bundle_for_mode(bundle, cfg.conditioning_mode, v.shape[0])))

    def batch_fn(gen: torch.Generator) -> dict:
        idx = torch.randint(0, len(prepared), (hp.batch_size,), generator=gen)
        z0s = [prepared[i][0] for i in idx.tolist()]
        bundles = [prepared[i][1] for i in idx.tolist()]
        return collate_bundles(z0s, bundles, vocab)

    return run_training(state, batch_fn, hp)


def finetune_triplet(state: TrainState, records: Sequence, codec: Codec, hp: TrainHP) -> TrainLog:
    """Fine-tune on triplets: static latent + per-mode hand conditioning."""
    mode = state.model.cfg.conditioning_mode
    vocab = state.model.cfg.label_vocab
    prepared = [make_finetune_bundle(r, codec, mode) for r in records]

    def batch_fn(gen: torch.Generator) -> dict:
        idx = torch.randint(0, len(prepared), (hp.batch_size,), generator=gen)
        z0s = [prepared[i][0] for i in idx.tolist()]
        bundles = [prepared[i][1] for i in idx.tolist()]
        return collate_bundles(z0s, bundles, vocab)

    return run_training(state, batch_fn, hp)


# -- checkpointing -----------------------------------------------------------

def _config_text(state: TrainState) -> str:
    cfg = state.model.cfg
    return "\n".join([
        f"latent_frames {cfg.latent_frames}",
        f"latent_channels {cfg.latent_channels}",
        f"latent_size {cfg.latent_size}",
        f"token_patch {cfg.token_patch}",
        f"model_dim {cfg.model_dim}",
        f"depth {cfg.depth}",
        f"heads {cfg.heads}",
        f"label_vocab {cfg.label_vocab}",
        f"conditioning_mode {cfg.conditioning_mode.value}",
        f"label_dropout {cfg.label_dropout}",
        f"schedule_T {state.schedule.T}",
        f"lr {state.optimizer.param_groups[0]['lr']}",
        f"step {state.step}",
    ])


def save_checkpoint(state: TrainState, path) -> None:
    tensors: dict[str, np.ndarray] = {}
    for name, p in state.model.state_dict().items():
        tensors[f"model.{name}"] = p.detach().numpy().astype(np.float32)
    names = [n for n, _ in state.model.named_parameters()]
    for i, p in enumerate(state.model.parameters()):
        s = state.optimizer.state.get(p)
        if s:
            tensors[f"adam.{names[i]}.exp_avg"] = s["exp_avg"].numpy().astype(np.float32)
            tensors[f"adam.{names[i]}.exp_avg_sq"] = s["exp_avg_sq"].numpy().astype(np.float32)
            tensors[f"adam.{names[i]}.step"] = np.asarray(float(s["step"]), dtype=np.float32)
    tensors["schedule.beta"] = state.schedule.beta.astype(np.float32)
    tensors["loss_history"] = np.asarray(state.loss_history, dtype=np.float32)
    tensors["rng_state"] = state.generator.get_state().numpy().astype(np.uint8)
    save_container(path, CKPT_MAGIC, CKPT_VERSION, _config_text(state), tensors)


def load_checkpoint(path) -> TrainState:
    config_text, tensors = load_container(path, CKPT_MAGIC, CKPT_VERSION)
    kv = dict(line.split(None, 1) for line in config_text.strip().splitlines())
    cfg = DenoiserConfig(
        latent_frames=int(kv["latent_frames"]),
        latent_channels=int(kv["latent_channels"]),
        latent_size=int(kv["latent_size"]),
        token_patch=int(kv["token_patch"]),
        model_dim=int(kv["model_dim"]),
        depth=int(kv["depth"]),
        heads=int(kv["heads"]),
        label_vocab=int(kv["label_vocab"]),
        conditioning_mode=ConditioningMode(kv["conditioning_mode"]),
        label_dropout=float(kv["label_dropout"]),
    )
    model = Denoiser(cfg)
    model.load_state_dict({
        name[len("model."):]: torch.from_numpy(arr)
        for name, arr in tensors.items() if name.startswith("model.")
    })
    model.eval()

    beta = tensors["schedule.beta"].astype(np.float64)
    alpha = 1.0 - beta
    schedule = NoiseSchedule(T=int(kv["schedule_T"]), beta=beta, alpha=alpha,
                             alpha_bar=np.cumprod(alpha))

    opt = torch.optim.Adam(model.parameters(), lr=float(kv["lr"]))
    opt_state: dict = {}
    for i, (name, p) in enumerate(model.named_parameters()):
        key = f"adam.{name}.exp_avg"
        if key in tensors:
            opt_state[i] = {
                "step": torch.tensor(float(tensors[f"adam.{name}.step"].reshape(()))),
                "exp_avg": torch.from_numpy(tensors[key]),
                "exp_avg_sq": torch.from_numpy(tensors[f"adam.{name}.exp_avg_sq"]),
            }
    if opt_state:
        groups = opt.state_dict()["param_groups"]
        opt.load_state_dict({"state": opt_state, "param_groups": groups})

    gen = torch.Generator()
    gen.set_state(torch.from_numpy(tensors["rng_state"]))
    return TrainState(model=model, optimizer=opt, schedule=schedule, generator=gen,
                      step=int(kv["step"]),
                      loss_history=[float(x) for x in tensors["loss_history"]])
