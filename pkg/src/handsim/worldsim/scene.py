"""Deterministic scene sampling: background raster and object placement."""

from __future__ import annotations

import numpy as np

from .types import (
    ObjectKind,
    ObjectSpec,
    PlacementError,
    WorldConfig,
    WorldState,
)

_PLACEMENT_RETRIES = 200
_INTERIOR_DIM = 0.35  # revealed interior color = body color * this


def make_background(seed: int, cfg: WorldConfig) -> np.ndarray:
    """Vertical gradient + faint checker + a few seeded dim decoration rects."""
    n = cfg.world_size
    y = np.linspace(0.22, 0.42, n, dtype=np.float32)[:, None]
    base = np.broadcast_to(y, (n, n)).copy()
    xi = np.arange(n)
    checker = (((xi[None, :] // 8) + (xi[:, None] // 8)) % 2).astype(np.float32) * 0.05
    bg = np.stack([base + checker] * 3, axis=-1)
    # slight blue tint so objects stand out
    bg[..., 2] += 0.06

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB6]))
    for _ in range(4):
        w = int(rng.integers(max(2, n // 16), max(3, n // 8)))
        h = int(rng.integers(max(2, n // 16), max(3, n // 8)))
        x0 = int(rng.integers(0, n - w + 1))
        y0 = int(rng.integers(0, n - h + 1))
        delta = float(rng.uniform(-0.05, 0.05))
        bg[y0 : y0 + h, x0 : x0 + w, :] += delta
    return np.clip(bg, 0.0, 1.0).astype(np.float32)


def _sweep_rect(spec: ObjectSpec) -> tuple[int, int, int, int]:
    """Footprint enlarged by the full articulation sweep (identity for FREE)."""
    x0, y0, x1, y1 = spec.footprint((0, 0) if spec.kind is ObjectKind.FREE else 0.0)
    if spec.kind is ObjectKind.ARTICULATED:
        dx, dy = spec.panel_displacement(1.0)
        x1 += max(dx, 0)
        y1 += max(dy, 0)
        x0 += min(dx, 0)
        y0 += min(dy, 0)
    return x0, y0, x1, y1


def _overlaps(a, b) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _sample_object(rng: np.random.Generator, cfg: WorldConfig, existing: list) -> ObjectSpec:
    n = cfg.world_size
    lo = max(2, n // 16)
    hi = max(lo + 1, n // 4)
    articulated = bool(rng.random() < 0.4) and n >= 24
    for _ in range(_PLACEMENT_RETRIES):
        w = int(rng.integers(lo, hi))
        h = int(rng.integers(lo, hi))
        color = cfg.palette[int(rng.integers(0, len(cfg.palette)))]
        if articulated:
            axis = (1, 0) if rng.random() < 0.5 else (0, 1)
            max_offset = int(rng.integers(4, max(5, n // 8)))
            span_w = w + max_offset * axis[0]
            span_h = h + max_offset * axis[1]
            if span_w >= n or span_h >= n:
                continue
            ax = int(rng.integers(0, n - span_w))
            ay = int(rng.integers(0, n - span_h))
            # handle strip on the leading edge of the panel
            hw = max(2, w // 4)
            hh = max(2, h // 4)
            if axis == (1, 0):
                handle = (ax + w - hw, ay + (h - hh) // 2, ax + w, ay + (h - hh) // 2 + hh)
            else:
                handle = (ax + (w - hw) // 2, ay + h - hh, ax + (w - hw) // 2 + hw, ay + h)
            spec = ObjectSpec(
                kind=ObjectKind.ARTICULATED,
                anchor=(ax, ay),
                extent=(w, h),
                color=color,
                handle_region=handle,
                axis=axis,
                max_offset=max_offset,
            )
        else:
            ax = int(rng.integers(0, n - w))
            ay = int(rng.integers(0, n - h))
            spec = ObjectSpec(kind=ObjectKind.FREE, anchor=(ax, ay), extent=(w, h), color=color)
        rect = _sweep_rect(spec)
        if all(not _overlaps(rect, _sweep_rect(o)) for o in existing):
            return spec
    raise PlacementError(f"could not place object after {_PLACEMENT_RETRIES} retries")


def sample_scene(seed: int, cfg: WorldConfig) -> WorldState:
    """Deterministic world at t=0 for a given (seed, cfg)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5C]))
    background = make_background(seed, cfg)
    lo, hi = cfg.object_count_range
    count = int(rng.integers(lo, hi + 1))
    specs: list[ObjectSpec] = []
    for _ in range(count):
        specs.append(_sample_object(rng, cfg, specs))
    objects = [
        (s, (0, 0) if s.kind is ObjectKind.FREE else 0.0) for s in specs
    ]
    return WorldState(cfg=cfg, background=background, objects=objects, attached=None)


def interior_color(color) -> tuple[float, float, float]:
    return tuple(c * _INTERIOR_DIM for c in color)
