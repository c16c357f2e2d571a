"""Corpus builders: synthetic dynamic-camera triplets and fixed-camera pairs."""

from __future__ import annotations

import os

import numpy as np

from ..worldsim import (
    HAND_COLOR,
    InfeasibleTaskError,
    Task,
    WorldConfig,
    make_fixed_camera_static,
    rollout_triplet,
    sample_action_script,
    sample_scene,
)
from .manifest import Manifest, ManifestEntry, content_hash
from .records import (
    SOURCE_FIXED_CAM,
    SOURCE_SYN_DYNAMIC,
    TripletRecord,
    serialize_record,
)

_TASK_RETRIES = 16

DEFAULT_TASK_MIX = {
    Task.NOOP: 0.1,
    Task.NAV_ONLY: 0.25,
    Task.PICK_PLACE: 0.4,
    Task.OPEN_ARTICULATED: 0.25,
}

# Fixed-camera records mirror the role of diverse close-up interaction clips:
# manipulation-heavy, no navigation.
FIXEDCAM_TASK_MIX = {
    Task.NOOP: 0.1,
    Task.PICK_PLACE: 0.55,
    Task.OPEN_ARTICULATED: 0.35,
}


def check_record_alignment(record: TripletRecord) -> None:
    """Build-time invariants: shared shapes and hand-pixel coincidence."""
    record.validate_alignment()
    hand_px = record.hand.max(axis=-1) > 0
    if hand_px.any():
        got = record.interaction[hand_px]
        if not np.allclose(got, np.asarray(HAND_COLOR, dtype=np.float32), atol=1e-6):
            raise AssertionError("hand sprite pixels differ between hand and interaction videos")
    if (record.hand_mask > 0).any(axis=-1).sum() != hand_px.sum():
        raise AssertionError("hand mask does not match hand video support")


def _draw_task(rng: np.random.Generator, task_mix: dict[Task, float]) -> Task:
    tasks = sorted(task_mix, key=lambda t: t.value)
    probs = np.array([task_mix[t] for t in tasks], dtype=np.float64)
    probs /= probs.sum()
    return tasks[int(rng.choice(len(tasks), p=probs))]


def build_record(seed: int, cfg: WorldConfig, task_mix: dict[Task, float],
                 fixed_camera: bool) -> TripletRecord:
    """One deterministic record for a seed; resamples infeasible task draws."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xDA7A]))
    scene = sample_scene(seed, cfg)
    last_err: Exception | None = None
    for attempt in range(_TASK_RETRIES):
        task = _draw_task(rng, task_mix)
        try:
            script = sample_action_script(scene, seed * _TASK_RETRIES + attempt, task, cfg,
                                          fixed_camera=fixed_camera)
        except InfeasibleTaskError as err:
            last_err = err
            continue
        record = rollout_triplet(scene, script, cfg, seed=seed,
                                 source=SOURCE_FIXED_CAM if fixed_camera else SOURCE_SYN_DYNAMIC)
        if fixed_camera:
            record.static = make_fixed_camera_static(record.static)
        check_record_alignment(record)
        return record
    raise InfeasibleTaskError(f"no feasible task for seed {seed} after {_TASK_RETRIES} draws") from last_err


def _build_split(n: int, seed_base: int, cfg: WorldConfig, task_mix: dict[Task, float],
                 out_dir, split: str, fixed_camera: bool) -> Manifest:
    os.makedirs(out_dir, exist_ok=True)
    source = SOURCE_FIXED_CAM if fixed_camera else SOURCE_SYN_DYNAMIC
    entries: list[ManifestEntry] = []
    for i in range(n):
        seed = seed_base + i
        record = build_record(seed, cfg, task_mix, fixed_camera)
        rid = f"{split}-{source}-{seed:08d}"
        rel = f"{rid}.dwt"
        path = os.path.join(out_dir, rel)
        serialize_record(record, path)
        entries.append(ManifestEntry(rid, source, split, content_hash(path), rel))
    return Manifest(root=str(out_dir), entries=entries, weights={source: 1.0})


def build_synthetic_split(n: int, seed_base: int, cfg: WorldConfig,
                          task_mix: dict[Task, float] | None = None,
                          out_dir=".", split: str = "train") -> Manifest:
    """Dynamic-camera triplets; the mix keeps NAV_ONLY records so camera-only
    motion stays learnable separately from manipulation."""
    return _build_split(n, seed_base, cfg, task_mix or DEFAULT_TASK_MIX, out_dir, split, False)


def build_fixedcam_split(n: int, seed_base: int, cfg: WorldConfig,
                         task_mix: dict[Task, float] | None = None,
                         out_dir=".", split: str = "train") -> Manifest:
    """Fixed-camera pairs; static video is the hand-free first view repeated."""
    return _build_split(n, seed_base, cfg, task_mix or FIXEDCAM_TASK_MIX, out_dir, split, True)


def mix_hybrid(m_syn: Manifest, m_fix: Manifest, weight: float) -> Manifest:
    """Merge corpora; `weight` is the probability of drawing a synthetic record."""
    if not (0.0 <= weight <= 1.0):
        raise ValueError(f"weight must be in [0,1], got {weight}")
    if os.path.abspath(m_syn.root) != os.path.abspath(m_fix.root):
        # keep paths resolvable from a single root
        syn_entries = [ManifestEntry(e.record_id, e.source, e.split, e.content_hash,
                                     os.path.relpath(m_syn.record_path(e), m_fix.root))
                       for e in m_syn.entries]
    else:
        syn_entries = list(m_syn.entries)
    return Manifest(
        root=m_fix.root,
        entries=syn_entries + list(m_fix.entries),
        weights={SOURCE_SYN_DYNAMIC: weight, SOURCE_FIXED_CAM: 1.0 - weight},
    )


def draw_epoch(manifest: Manifest, epoch_seed: int, n: int,
               split: str = "train") -> list[ManifestEntry]:
    """Deterministic weighted interleave of sources for one training epoch."""
    rng = np.random.default_rng(np.random.SeedSequence([epoch_seed, 0xE90C]))
    by_source = {
        s: manifest.select(split=split, source=s)
        for s in (SOURCE_SYN_DYNAMIC, SOURCE_FIXED_CAM)
    }
    by_source = {s: v for s, v in by_source.items() if v}
    if not by_source:
        raise ManifestEntryError(f"no records in split '{split}'")
    w_syn = manifest.weights.get(SOURCE_SYN_DYNAMIC, 0.5)
    out: list[ManifestEntry] = []
    for _ in range(n):
        pick_syn = rng.random() < w_syn
        source = SOURCE_SYN_DYNAMIC if pick_syn else SOURCE_FIXED_CAM
        if source not in by_source:
            source = next(iter(by_source))
        pool = by_source[source]
        out.append(pool[int(rng.integers(0, len(pool)))])
    return out


class ManifestEntryError(Exception):
    pass
