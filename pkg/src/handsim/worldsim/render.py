"""Rasterization: world composition, egocentric crops, hand sprite videos."""

from __future__ import annotations

import numpy as np

from .scene import interior_color
from .types import (
    ActionScript,
    CameraPose,
    HandState,
    ObjectKind,
    WorldConfig,
    WorldState,
)

# Hand sprite: two vertical finger bars with an aperture-proportional gap.
FINGER_W = 2
FINGER_LEN = 9
GAP_MIN = 1
GAP_MAX = 7
HAND_COLOR = (0.92, 0.72, 0.55)
HANDLE_COLOR = (0.12, 0.12, 0.12)


def _paint_rect(img: np.ndarray, rect, color) -> None:
    """Paint rect=(x0,y0,x1,y1) clipped to img bounds; painter's algorithm."""
    h, w = img.shape[:2]
    x0 = max(rect[0], 0)
    y0 = max(rect[1], 0)
    x1 = min(rect[2], w)
    y1 = min(rect[3], h)
    if x0 < x1 and y0 < y1:
        img[y0:y1, x0:x1] = np.asarray(color, dtype=np.float32)


def sprite_gap(aperture: float) -> int:
    return GAP_MIN + int(round(aperture * (GAP_MAX - GAP_MIN)))


def sprite_rects(position: tuple[int, int], aperture: float) -> list[tuple[int, int, int, int]]:
    """Finger-bar rects in the same coordinate frame as `position`."""
    cx, cy = position
    g = sprite_gap(aperture)
    y0 = cy - FINGER_LEN // 2
    left = (cx - g // 2 - FINGER_W, y0, cx - g // 2, y0 + FINGER_LEN)
    right = (cx + (g + 1) // 2, y0, cx + (g + 1) // 2 + FINGER_W, y0 + FINGER_LEN)
    return [left, right]


def compose_world(world: WorldState) -> np.ndarray:
    """Full world raster: background, then objects back-to-front in list order."""
    img = world.background.copy()
    for spec, pose in world.objects:
        if spec.kind is ObjectKind.FREE:
            _paint_rect(img, spec.footprint(pose), spec.color)
        else:
            body = spec.footprint(pose)
            _paint_rect(img, body, interior_color(spec.color))
            dx, dy = spec.panel_displacement(float(pose))
            panel = (body[0] + dx, body[1] + dy, body[2] + dx, body[3] + dy)
            _paint_rect(img, panel, spec.color)
            hx0, hy0, hx1, hy1 = spec.handle_region
            _paint_rect(img, (hx0 + dx, hy0 + dy, hx1 + dx, hy1 + dy), HANDLE_COLOR)
    return img


def _composite_hand(frame: np.ndarray, hand: HandState, cam: CameraPose) -> None:
    pos = (hand.position[0] - cam.offset[0], hand.position[1] - cam.offset[1])
    for rect in sprite_rects(pos, hand.aperture):
        _paint_rect(frame, rect, HAND_COLOR)


def render_view(world: WorldState, cam: CameraPose, hand: HandState | None = None) -> np.ndarray:
    """Crop the composited world to the viewport, optionally adding the hand sprite."""
    cfg = world.cfg
    cam.validate(cfg)
    full = compose_world(world)
    x, y = cam.offset
    v = cfg.view_size
    frame = full[y : y + v, x : x + v].copy()
    if hand is not None:
        _composite_hand(frame, hand, cam)
    return frame


def render_hand_video(script: ActionScript, cfg: WorldConfig) -> np.ndarray:
    """Hand sprite over black, per frame; off-viewport hands yield black frames."""
    v = cfg.view_size
    video = np.zeros((len(script), v, v, 3), dtype=np.float32)
    for t, (cam, hand) in enumerate(zip(script.camera_traj, script.hand_traj)):
        _composite_hand(video[t], hand, cam)
    return video


def render_hand_mask_video(script: ActionScript, cfg: WorldConfig) -> np.ndarray:
    """Binary silhouette of the hand sprite, replicated to 3 channels."""
    hand = render_hand_video(script, cfg)
    mask = (hand.max(axis=-1, keepdims=True) > 0).astype(np.float32)
    return np.repeat(mask, 3, axis=-1)


def hand_params_sequence(script: ActionScript, cfg: WorldConfig) -> np.ndarray:
    """Per-frame (x_view, y_view, aperture, visibility); positions in [-1,1]."""
    v = cfg.view_size
    out = np.zeros((len(script), 4), dtype=np.float32)
    for t, (cam, hand) in enumerate(zip(script.camera_traj, script.hand_traj)):
        px = hand.position[0] - cam.offset[0]
        py = hand.position[1] - cam.offset[1]
        visible = 0 <= px < v and 0 <= py < v
        nx = 2.0 * px / (v - 1) - 1.0
        ny = 2.0 * py / (v - 1) - 1.0
        out[t] = (
            float(np.clip(nx, -1.0, 1.0)),
            float(np.clip(ny, -1.0, 1.0)),
            hand.aperture,
            1.0 if visible else 0.0,
        )
    return out


def make_fixed_camera_static(interaction: np.ndarray) -> np.ndarray:
    """Static-scene video for a fixed camera: the first frame repeated F times."""
    if interaction.ndim != 4 or interaction.shape[0] < 1:
        raise ValueError("expected non-empty (F,H,W,3) video")
    return np.broadcast_to(interaction[0], interaction.shape).copy()
