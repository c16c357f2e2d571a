"""Binary PPM (P6) frame dumps for visual inspection."""

from __future__ import annotations

import os

import numpy as np


def write_ppm(frame: np.ndarray, path: str | os.PathLike) -> None:
    """Write an (H,W,3) float frame in [0,1] as a P6 PPM with maxval 255."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected (H,W,3) frame, got {frame.shape}")
    h, w = frame.shape[:2]
    data = np.clip(np.rint(frame * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a P6 PPM back into an (H,W,3) float32 array in [0,1]."""
    with open(path, "rb") as f:
        raw = f.read()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a P6 PPM")
    w, h = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    pix = np.frombuffer(parts[3], dtype=np.uint8, count=w * h * 3)
    return pix.reshape(h, w, 3).astype(np.float32) / maxval


def write_strip(frames: list[np.ndarray], path: str | os.PathLike, pad: int = 2) -> None:
    """Concatenate frames horizontally with a white gutter and write one PPM."""
    h = frames[0].shape[0]
    gutter = np.ones((h, pad, 3), dtype=np.float32)
    row: list[np.ndarray] = []
    for i, fr in enumerate(frames):
        if i:
            row.append(gutter)
        row.append(fr)
    write_ppm(np.concatenate(row, axis=1), path)
