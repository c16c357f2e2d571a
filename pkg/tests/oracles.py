"""Independent reference implementations used as test oracles.

Deliberately naive (per-pixel loops, direct formulas) and written against the
documented contracts rather than the library code, so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np

from handsim.worldsim import (
    CameraPose,
    HandState,
    ObjectKind,
    WorldState,
)
from handsim.worldsim.render import (
    FINGER_LEN,
    FINGER_W,
    GAP_MAX,
    GAP_MIN,
    HAND_COLOR,
    HANDLE_COLOR,
)
from handsim.worldsim.scene import interior_color


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def _in_rect(x: int, y: int, rect) -> bool:
    return rect[0] <= x < rect[2] and rect[1] <= y < rect[3]


def _hand_rects(pos, aperture):
    cx, cy = pos
    gap = GAP_MIN + int(round(aperture * (GAP_MAX - GAP_MIN)))
    top = cy - FINGER_LEN // 2
    return [
        (cx - gap // 2 - FINGER_W, top, cx - gap // 2, top + FINGER_LEN),
        (cx + (gap + 1) // 2, top, cx + (gap + 1) // 2 + FINGER_W, top + FINGER_LEN),
    ]


def _world_pixel(world: WorldState, x: int, y: int) -> np.ndarray:
    """Color at world pixel (x, y): background, then objects painted in order."""
    color = world.background[y, x].copy()
    for spec, pose in world.objects:
        if spec.kind is ObjectKind.FREE:
            if _in_rect(x, y, spec.footprint(pose)):
                color = np.asarray(spec.color, dtype=np.float32)
            continue
        body = spec.footprint(pose)
        dx, dy = spec.panel_displacement(float(pose))
        panel = (body[0] + dx, body[1] + dy, body[2] + dx, body[3] + dy)
        hx0, hy0, hx1, hy1 = spec.handle_region
        handle = (hx0 + dx, hy0 + dy, hx1 + dx, hy1 + dy)
        if _in_rect(x, y, body):
            color = np.asarray(interior_color(spec.color), dtype=np.float32)
        if _in_rect(x, y, panel):
            color = np.asarray(spec.color, dtype=np.float32)
        if _in_rect(x, y, handle):
            color = np.asarray(HANDLE_COLOR, dtype=np.float32)
    return color


def ref_render_view(world: WorldState, cam: CameraPose,
                    hand: HandState | None = None) -> np.ndarray:
    """Per-pixel reference for render_view."""
    v = world.cfg.view_size
    ox, oy = cam.offset
    frame = np.empty((v, v, 3), dtype=np.float32)
    hand_rects = None
    if hand is not None:
        hand_rects = _hand_rects(
            (hand.position[0] - ox, hand.position[1] - oy), hand.aperture)
    for py in range(v):
        for px in range(v):
            c = _world_pixel(world, ox + px, oy + py)
            if hand_rects is not None and any(_in_rect(px, py, r) for r in hand_rects):
                c = np.asarray(HAND_COLOR, dtype=np.float32)
            frame[py, px] = c
    return frame


# --------------------------------------------------------------------------
# dynamics
# --------------------------------------------------------------------------

def ref_step(world: WorldState, prev: HandState, now: HandState) -> WorldState:
    """Reference interaction step following the documented hysteresis rules."""
    new = world.copy()
    dx = now.position[0] - prev.position[0]
    dy = now.position[1] - prev.position[1]

    if new.attached is not None:
        if now.aperture > 0.5:
            new.attached = None
        else:
            spec, pose = new.objects[new.attached]
            if spec.kind is ObjectKind.FREE:
                n = world.cfg.world_size
                px = min(max(pose[0] + dx, -spec.anchor[0]),
                         n - spec.extent[0] - spec.anchor[0])
                py = min(max(pose[1] + dy, -spec.anchor[1]),
                         n - spec.extent[1] - spec.anchor[1])
                new.objects[new.attached] = (spec, (px, py))
            else:
                s = float(pose) + (dx * spec.axis[0] + dy * spec.axis[1]) / spec.max_offset
                new.objects[new.attached] = (spec, min(max(s, 0.0), 1.0))
            return new

    if new.attached is None and prev.aperture >= 0.2 and now.aperture < 0.2:
        for idx, (spec, pose) in enumerate(new.objects):
            if spec.kind is ObjectKind.FREE:
                region = spec.footprint(pose)
            else:
                ddx, ddy = spec.panel_displacement(float(pose))
                h = spec.handle_region
                region = (h[0] + ddx, h[1] + ddy, h[2] + ddx, h[3] + ddy)
            if _in_rect(now.position[0], now.position[1], region):
                new.attached = idx
                break
    return new


def ref_rollout(scene: WorldState, script) -> tuple[np.ndarray, np.ndarray]:
    """Reference (interaction, static) videos via ref_step + ref_render_view."""
    cfg = scene.cfg
    F = len(script)
    v = cfg.view_size
    inter = np.empty((F, v, v, 3), dtype=np.float32)
    static = np.empty((F, v, v, 3), dtype=np.float32)
    world = scene
    for t in range(F):
        if t > 0:
            world = ref_step(world, script.hand_traj[t - 1], script.hand_traj[t])
        inter[t] = ref_render_view(world, script.camera_traj[t], script.hand_traj[t])
        static[t] = ref_render_view(scene, script.camera_traj[t], None)
    return inter, static


# --------------------------------------------------------------------------
# codec
# --------------------------------------------------------------------------

def ref_patchify(video: np.ndarray, r: int, s: int) -> np.ndarray:
    """Loop-based reference for the lossless pixel-shuffle encoding."""
    F, H, W, _ = video.shape
    f, h, w = F // r, H // s, W // s
    out = np.empty((f, 3 * r * s * s, h, w), dtype=video.dtype)
    for fi in range(f):
        for i in range(r):
            for y1 in range(s):
                for y2 in range(s):
                    for c in range(3):
                        ch = ((i * s + y1) * s + y2) * 3 + c
                        out[fi, ch] = video[fi * r + i, y1::s, y2::s, c][:h, :w]
    return out


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

def ref_psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0:
        return 100.0
    return min(float(10.0 * np.log10(1.0 / mse)), 100.0)


def ref_ssim_frame(x: np.ndarray, y: np.ndarray, window: int = 7,
                   k1: float = 0.01, k2: float = 0.03) -> float:
    """Brute-force uniform-window single-channel SSIM over valid positions."""
    c1, c2 = k1 ** 2, k2 ** 2
    H, W = x.shape
    vals = []
    for i in range(H - window + 1):
        for j in range(W - window + 1):
            px = x[i:i + window, j:j + window].astype(np.float64)
            py = y[i:i + window, j:j + window].astype(np.float64)
            mx, my = px.mean(), py.mean()
            vx, vy = px.var(), py.var()
            cxy = ((px - mx) * (py - my)).mean()
            vals.append(((2 * mx * my + c1) * (2 * cxy + c2))
                        / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


def ref_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Video SSIM: plain mean over frames and channels."""
    vals = [ref_ssim_frame(a[t, :, :, c], b[t, :, :, c])
            for t in range(a.shape[0]) for c in range(3)]
    return float(np.mean(vals))


# --------------------------------------------------------------------------
# diffusion
# --------------------------------------------------------------------------

def ref_ddim_step(z, eps_hat, ab_t: float, ab_next: float):
    x0 = (z - np.sqrt(1.0 - ab_t) * eps_hat) / np.sqrt(ab_t)
    return np.sqrt(ab_next) * x0 + np.sqrt(1.0 - ab_next) * eps_hat
