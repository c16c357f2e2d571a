"""Deterministic action-script generation for the four task families."""

from __future__ import annotations

import numpy as np

from .types import (
    ActionScript,
    CameraPose,
    HandState,
    InfeasibleTaskError,
    ObjectKind,
    Task,
    TASK_NAMES,
    WorldConfig,
    WorldState,
)

MAX_CAM_STEP = 3
OFFSCREEN = (-9999, -9999)
_APERTURE_OPEN = 0.9
_APERTURE_CLOSED = 0.1


def _clamp_cam(p, cfg: WorldConfig) -> tuple[int, int]:
    m = cfg.world_size - cfg.view_size
    return (int(np.clip(p[0], 0, m)), int(np.clip(p[1], 0, m)))


def _toward(p, target, limit: int) -> tuple[int, int]:
    return (
        p[0] + int(np.clip(target[0] - p[0], -limit, limit)),
        p[1] + int(np.clip(target[1] - p[1], -limit, limit)),
    )


def _hand_path(waypoints: list[tuple[int, int]], lengths: list[int]) -> list[tuple[int, int]]:
    """Piecewise-linear integer path; segment i spans lengths[i] frames."""
    path = [waypoints[0]]
    for (a, b), n in zip(zip(waypoints, waypoints[1:]), lengths):
        for k in range(1, n + 1):
            path.append((
                a[0] + int(round((b[0] - a[0]) * k / n)),
                a[1] + int(round((b[1] - a[1]) * k / n)),
            ))
    return path


def _camera_traj(hand_pos, cfg: WorldConfig, rng, track: bool, fixed: bool,
                 anchor_target) -> list[CameraPose]:
    F = cfg.num_frames
    half = cfg.view_size // 2
    start = _clamp_cam((anchor_target[0] - half, anchor_target[1] - half), cfg)
    if fixed:
        return [CameraPose(start)] * F
    cams = [start]
    if track:
        for t in range(1, F):
            goal = _clamp_cam((hand_pos[t][0] - half, hand_pos[t][1] - half), cfg)
            cams.append(_toward(cams[-1], goal, MAX_CAM_STEP))
    else:
        m = cfg.world_size - cfg.view_size
        waypoint = (int(rng.integers(0, m + 1)), int(rng.integers(0, m + 1)))
        for t in range(1, F):
            cams.append(_toward(cams[-1], waypoint, MAX_CAM_STEP))
    return [CameraPose(c) for c in cams]


def _manipulation_script(scene: WorldState, rng, task: Task, cfg: WorldConfig,
                         track: bool, fixed: bool) -> ActionScript:
    F = cfg.num_frames
    if F < 6:
        raise InfeasibleTaskError(f"{task.name} needs at least 6 frames, have {F}")

    if task is Task.PICK_PLACE:
        candidates = [i for i, (s, _) in enumerate(scene.objects) if s.kind is ObjectKind.FREE]
    else:
        candidates = [i for i, (s, _) in enumerate(scene.objects) if s.kind is ObjectKind.ARTICULATED]
    if not candidates:
        raise InfeasibleTaskError(f"no suitable object for {task.name}")
    spec, pose = scene.objects[candidates[int(rng.integers(0, len(candidates)))]]

    if task is Task.PICK_PLACE:
        x0, y0, x1, y1 = spec.footprint(pose)
        grasp = ((x0 + x1) // 2, (y0 + y1) // 2)
        span = max(4, cfg.world_size // 6)
        d = (0, 0)
        while d == (0, 0):
            d = (int(rng.integers(-span, span + 1)), int(rng.integers(-span, span + 1)))
        if max(abs(d[0]), abs(d[1])) < 3:
            d = (d[0] * 3, d[1] * 3) if d != (0, 0) else (3, 3)
        dest = (grasp[0] + d[0], grasp[1] + d[1])
    else:
        hx0, hy0, hx1, hy1 = spec.handle_region
        grasp = ((hx0 + hx1) // 2, (hy0 + hy1) // 2)
        dest = (grasp[0] + spec.max_offset * spec.axis[0],
                grasp[1] + spec.max_offset * spec.axis[1])

    reach = max(4, cfg.view_size // 3)
    angle = rng.integers(0, 4)
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    start = (grasp[0] + dirs[angle][0] * reach, grasp[1] + dirs[angle][1] * reach)

    # frame budget: approach / close / drag / open / rest
    n_close, n_open = 1, 1
    n_approach = max(2, (F - n_close - n_open - 1) // 3)
    n_drag = F - 1 - n_approach - n_close - n_open
    positions = _hand_path(
        [start, grasp, grasp, dest, dest],
        [n_approach, n_close, n_drag, n_open],
    )
    apertures = (
        [_APERTURE_OPEN] * (n_approach + 1)
        + [_APERTURE_CLOSED] * (n_close + n_drag)
        + [_APERTURE_OPEN] * n_open
    )
    assert len(positions) == F and len(apertures) == F

    cams = _camera_traj(positions, cfg, rng, track, fixed, grasp)
    hands = [HandState(p, a) for p, a in zip(positions, apertures)]
    return ActionScript(tuple(cams), tuple(hands), task.value, TASK_NAMES[task])


def sample_action_script(scene: WorldState, seed: int, task: Task, cfg: WorldConfig,
                         track_hand: bool | None = None,
                         fixed_camera: bool = False) -> ActionScript:
    """Deterministic script for (scene, seed, task); raises if infeasible."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, task.value, 0xAC7]))
    F = cfg.num_frames
    track = bool(rng.random() < 0.5) if track_hand is None else track_hand

    if task in (Task.NOOP, Task.NAV_ONLY):
        hands = tuple(HandState(OFFSCREEN, 1.0) for _ in range(F))
        m = cfg.world_size - cfg.view_size
        start = (int(rng.integers(0, m + 1)), int(rng.integers(0, m + 1)))
        if task is Task.NOOP or fixed_camera:
            cams = tuple(CameraPose(start) for _ in range(F))
        else:
            waypoint = (int(rng.integers(0, m + 1)), int(rng.integers(0, m + 1)))
            out = [start]
            for _ in range(1, F):
                out.append(_toward(out[-1], waypoint, MAX_CAM_STEP))
            cams = tuple(CameraPose(c) for c in out)
        return ActionScript(cams, hands, task.value, TASK_NAMES[task])

    return _manipulation_script(scene, rng, task, cfg, track, fixed_camera)
