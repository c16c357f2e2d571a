"""Goal-driven action ranking via simulated visual outcomes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..codec import Codec
from ..diffusion import (
    Denoiser,
    NoiseSchedule,
    make_finetune_bundle,
    sample_batch,
)
from ..worldsim import ActionScript, WorldConfig, WorldState, rollout_triplet
from .metrics import frame_perceptual_distance, perceptual_distance
from .probe import VideoProbe, semantic_similarity


class GoalKind(Enum):
    TEXT_LABEL = "text_label"
    IMAGE = "image"


@dataclass(frozen=True)
class GoalSpec:
    kind: GoalKind
    label: Optional[int] = None
    goal_frame: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is GoalKind.TEXT_LABEL and (self.label is None or self.goal_frame is not None):
            raise ValueError("TEXT_LABEL goal carries exactly a label")
        if self.kind is GoalKind.IMAGE and (self.goal_frame is None or self.label is not None):
            raise ValueError("IMAGE goal carries exactly a goal frame")


@dataclass
class RankingResult:
    scores: list[float]
    best_index: int


@dataclass
class EvalContext:
    """Everything needed to simulate and score: frozen model + metric tools."""

    model: Denoiser
    codec: Codec                 # codec the diffusion model operates in
    schedule: NoiseSchedule
    world_cfg: WorldConfig
    perceptual_codec: Optional[Codec] = None  # LEARNED codec for the metric
    probe: Optional[VideoProbe] = None
    sample_steps: int = 20
    guidance_scale: float = 1.0

    def simulate(self, scene: WorldState, script: ActionScript,
                 seed: int = 0) -> np.ndarray:
        """Sample one predicted interaction video for a scripted episode."""
        return self.simulate_many(scene, [script], seed)[0]

    def simulate_many(self, scene: WorldState, scripts: list[ActionScript],
                      seed: int = 0) -> list[np.ndarray]:
        bundles = []
        for script in scripts:
            record = rollout_triplet(scene, script, self.world_cfg)
            _, bundle = make_finetune_bundle(record, self.codec,
                                             self.model.cfg.conditioning_mode)
            bundles.append(bundle)
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5A11]))
        latents = sample_batch(self.model, bundles, self.schedule,
                               steps=self.sample_steps,
                               guidance_scale=self.guidance_scale, rng=rng)
        return [np.clip(self.codec.decode(z), 0.0, 1.0) for z in latents]


def score_video(ctx: EvalContext, video: np.ndarray, goal: GoalSpec,
                whole_video: bool = False) -> float:
    """Higher is better; image goals score the final frame unless whole_video."""
    if goal.kind is GoalKind.TEXT_LABEL:
        if ctx.probe is None:
            raise ValueError("TEXT_LABEL goals need a trained probe in the context")
        return semantic_similarity(ctx.probe, video, goal.label)
    if ctx.perceptual_codec is None:
        raise ValueError("IMAGE goals need a LEARNED perceptual codec in the context")
    if whole_video:
        goal_video = np.broadcast_to(goal.goal_frame, video.shape).copy()
        return -perceptual_distance(video, goal_video, ctx.perceptual_codec)
    return -frame_perceptual_distance(video[-1], goal.goal_frame, ctx.perceptual_codec)


def rank_actions(ctx: EvalContext, scene: WorldState, candidates: list[ActionScript],
                 goal: GoalSpec, oracle: bool = False, seed: int = 0,
                 whole_video: bool = False) -> RankingResult:
    """Simulate each candidate, score against the goal, return the argmax.

    `oracle=True` substitutes ground-truth rollouts for model samples, which
    isolates the scoring rule from model quality. Ties break to lowest index.
    """
    if len(candidates) < 2:
        raise ValueError("ranking needs at least 2 candidates")
    if oracle:
        videos = [rollout_triplet(scene, s, ctx.world_cfg).interaction for s in candidates]
    else:
        videos = ctx.simulate_many(scene, candidates, seed=seed)
    scores = [score_video(ctx, v, goal, whole_video) for v in videos]
    return RankingResult(scores=scores, best_index=int(np.argmax(scores)))
