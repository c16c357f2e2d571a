"""Deterministic interaction rules and triplet rollout."""

from __future__ import annotations

import numpy as np

from .render import (
    hand_params_sequence,
    render_hand_mask_video,
    render_hand_video,
    render_view,
)
from .types import ActionScript, HandState, ObjectKind, WorldConfig, WorldState
from .textio import script_to_text

GRASP_APERTURE = 0.2
RELEASE_APERTURE = 0.5


def _inside(point: tuple[int, int], rect: tuple[int, int, int, int]) -> bool:
    x, y = point
    return rect[0] <= x < rect[2] and rect[1] <= y < rect[3]


def _grasp_region(spec, pose) -> tuple[int, int, int, int]:
    if spec.kind is ObjectKind.FREE:
        return spec.footprint(pose)
    dx, dy = spec.panel_displacement(float(pose))
    hx0, hy0, hx1, hy1 = spec.handle_region
    return (hx0 + dx, hy0 + dy, hx1 + dx, hy1 + dy)


def _clamp_free_offset(spec, offset, world_size: int) -> tuple[int, int]:
    ax, ay = spec.anchor
    w, h = spec.extent
    dx = int(np.clip(offset[0], -ax, world_size - w - ax))
    dy = int(np.clip(offset[1], -ay, world_size - h - ay))
    return (dx, dy)


def step_world(world_t: WorldState, hand_prev: HandState, hand_now: HandState) -> WorldState:
    """One interaction step; pure function of its arguments.

    Attachment uses hysteresis: grasp when the aperture crosses below
    GRASP_APERTURE over a graspable region, release when it rises above
    RELEASE_APERTURE. Motion is applied only while attached at step entry.
    """
    out = world_t.copy()
    delta = (hand_now.position[0] - hand_prev.position[0],
             hand_now.position[1] - hand_prev.position[1])

    if out.attached is not None and hand_now.aperture > RELEASE_APERTURE:
        out.attached = None
    elif out.attached is not None:
        idx = out.attached
        spec, pose = out.objects[idx]
        if spec.kind is ObjectKind.FREE:
            moved = (pose[0] + delta[0], pose[1] + delta[1])
            out.objects[idx] = (spec, _clamp_free_offset(spec, moved, out.cfg.world_size))
        else:
            ds = (delta[0] * spec.axis[0] + delta[1] * spec.axis[1]) / spec.max_offset
            out.objects[idx] = (spec, float(np.clip(float(pose) + ds, 0.0, 1.0)))
    elif hand_prev.aperture >= GRASP_APERTURE > hand_now.aperture:
        for idx, (spec, pose) in enumerate(out.objects):
            if _inside(hand_now.position, _grasp_region(spec, pose)):
                out.attached = idx
                break
    return out


def rollout_triplet(scene: WorldState, script: ActionScript, cfg: WorldConfig,
                    seed: int = -1, source: str = "syn_dynamic"):
    """Render the three synchronized videos for one scripted episode.

    Frame 0 shows the scene at t=0; each later frame first advances the world
    by one interaction step. The static video replays the camera trajectory
    over the frozen t=0 scene without the hand.
    """
    from ..data.records import TripletRecord

    if len(script) != cfg.num_frames:
        raise ValueError(f"script length {len(script)} != num_frames {cfg.num_frames}")
    v = cfg.view_size
    F = cfg.num_frames
    interaction = np.empty((F, v, v, 3), dtype=np.float32)
    static = np.empty((F, v, v, 3), dtype=np.float32)

    world = scene
    for t in range(F):
        if t > 0:
            world = step_world(world, script.hand_traj[t - 1], script.hand_traj[t])
        cam = script.camera_traj[t]
        interaction[t] = render_view(world, cam, script.hand_traj[t])
        static[t] = render_view(scene, cam, None)

    return TripletRecord(
        interaction=interaction,
        static=static,
        hand=render_hand_video(script, cfg),
        hand_mask=render_hand_mask_video(script, cfg),
        hand_params=hand_params_sequence(script, cfg),
        label=script.label,
        camera_traj=script_to_text(script, which="camera"),
        hand_traj=script_to_text(script, which="hand"),
        seed=seed,
        source=source,
    )
