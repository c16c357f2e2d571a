"""TripletRecord and the DWT1 on-disk container.

DWT1 layout (little-endian):
    magic   "DWT1"
    version u16
    payload:
        header  F,H,W as u32
        blocks  interaction, static, hand videos as u8 RGB, frame-major
        mask    u8 block (same shape as one video)
        params  F x 4 float32
        meta    u32 length + UTF-8 structured text
    crc32   u32 over the payload

Videos are stored quantized to u8 and normalized back to [0,1] on load, so a
loaded record re-serializes to identical bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, replace

import numpy as np

DWT_MAGIC = b"DWT1"
DWT_VERSION = 1

SOURCE_SYN_DYNAMIC = "syn_dynamic"
SOURCE_FIXED_CAM = "fixed_cam"


class RecordError(Exception):
    pass


class RecordMagicError(RecordError):
    pass


class RecordTruncatedError(RecordError):
    pass


class RecordChecksumError(RecordError):
    pass


@dataclass
class TripletRecord:
    interaction: np.ndarray  # (F,H,W,3) float32 in [0,1]
    static: np.ndarray
    hand: np.ndarray
    hand_mask: np.ndarray
    hand_params: np.ndarray  # (F,4) float32
    label: int
    camera_traj: str  # serialized script text
    hand_traj: str
    seed: int
    source: str = SOURCE_SYN_DYNAMIC

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.interaction.shape[:3]

    def validate_alignment(self) -> None:
        shapes = {v.shape for v in (self.interaction, self.static, self.hand, self.hand_mask)}
        if len(shapes) != 1:
            raise ValueError(f"misaligned video shapes: {shapes}")
        if self.hand_params.shape != (self.interaction.shape[0], 4):
            raise ValueError(f"bad hand_params shape {self.hand_params.shape}")

    def quantized(self) -> "TripletRecord":
        """Round-trip through u8 quantization, matching on-disk precision."""
        q = lambda v: np.rint(np.clip(v, 0, 1) * 255).astype(np.uint8).astype(np.float32) / 255.0
        return replace(self, interaction=q(self.interaction), static=q(self.static),
                       hand=q(self.hand), hand_mask=q(self.hand_mask))


def _to_u8(video: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(video, 0.0, 1.0) * 255.0).astype(np.uint8)


def serialize_record(record: TripletRecord, path) -> None:
    record.validate_alignment()
    F, H, W = record.shape
    payload = struct.pack("<III", F, H, W)
    for video in (record.interaction, record.static, record.hand):
        payload += _to_u8(video).tobytes()
    payload += _to_u8(record.hand_mask).tobytes()
    payload += record.hand_params.astype("<f4").tobytes()
    meta = "\n".join([
        f"label {record.label}",
        f"seed {record.seed}",
        f"source {record.source}",
        "camera_traj <<<",
        record.camera_traj.rstrip("\n"),
        ">>>",
        "hand_traj <<<",
        record.hand_traj.rstrip("\n"),
        ">>>",
    ]).encode("utf-8")
    payload += struct.pack("<I", len(meta)) + meta
    with open(path, "wb") as f:
        f.write(DWT_MAGIC)
        f.write(struct.pack("<H", DWT_VERSION))
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def _parse_meta(text: str) -> dict:
    out: dict = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        parts = lines[i].split(None, 1)
        if parts and parts[-1] == "<<<":
            key = parts[0]
            block: list[str] = []
            i += 1
            while lines[i] != ">>>":
                block.append(lines[i])
                i += 1
            out[key] = "\n".join(block) + "\n"
        elif len(parts) == 2:
            out[parts[0]] = parts[1]
        i += 1
    return out


def load_record(path) -> TripletRecord:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 10:
        raise RecordTruncatedError("file shorter than DWT1 header")
    if raw[:4] != DWT_MAGIC:
        raise RecordMagicError(f"bad magic {raw[:4]!r}")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != DWT_VERSION:
        raise RecordError(f"unsupported DWT version {version}")
    payload = raw[6:-4]
    (want_crc,) = struct.unpack("<I", raw[-4:])
    # Structural parse first, so truncation reports as such; the CRC check at
    # the end rejects any surviving corruption.
    pos = 12
    if len(payload) < pos:
        raise RecordTruncatedError("missing header")
    F, H, W = struct.unpack("<III", payload[:12])
    nbytes = F * H * W * 3

    def block():
        nonlocal pos
        if pos + nbytes > len(payload):
            raise RecordTruncatedError("missing video block")
        arr = np.frombuffer(payload, dtype=np.uint8, count=nbytes, offset=pos)
        pos += nbytes
        return arr.reshape(F, H, W, 3).astype(np.float32) / 255.0

    interaction, static, hand, hand_mask = block(), block(), block(), block()
    pbytes = F * 4 * 4
    if pos + pbytes + 4 > len(payload):
        raise RecordTruncatedError("missing hand_params block")
    params = np.frombuffer(payload, dtype="<f4", count=F * 4, offset=pos).reshape(F, 4).copy()
    pos += pbytes
    (mlen,) = struct.unpack("<I", payload[pos : pos + 4])
    pos += 4
    if pos + mlen > len(payload):
        raise RecordTruncatedError("missing metadata block")
    meta = _parse_meta(payload[pos : pos + mlen].decode("utf-8"))
    if zlib.crc32(payload) & 0xFFFFFFFF != want_crc:
        raise RecordChecksumError("payload CRC32 mismatch")

    return TripletRecord(
        interaction=interaction, static=static, hand=hand, hand_mask=hand_mask,
        hand_params=params, label=int(meta["label"]),
        camera_traj=meta["camera_traj"], hand_traj=meta["hand_traj"],
        seed=int(meta["seed"]), source=meta["source"],
    )
