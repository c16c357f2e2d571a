import numpy as np
import pytest

from handsim.container import (
    BadMagicError,
    ChecksumError,
    TruncatedError,
    VersionError,
    load_container,
    save_container,
)
from handsim.data import (
    RecordChecksumError,
    RecordMagicError,
    RecordTruncatedError,
    load_record,
    serialize_record,
)
from handsim.data.records import DWT_MAGIC


# --------------------------------------------------------------------------
# generic tensor container
# --------------------------------------------------------------------------

def test_container_round_trip(tmp_path, rng):
    tensors = {
        "a": rng.random((3, 4)).astype(np.float32),
        "b": (rng.random((2, 2)) * 255).astype(np.uint8),
        "c": np.array([1, -5, 2**40], dtype=np.int64),
    }
    path = tmp_path / "x.bin"
    save_container(path, b"TST0", 1, "hello\nworld", tensors)
    text, loaded = load_container(path, b"TST0", 1)
    assert text == "hello\nworld"
    assert set(loaded) == set(tensors)
    for k in tensors:
        assert loaded[k].dtype == tensors[k].dtype
        assert np.array_equal(loaded[k], tensors[k])


def test_container_bad_magic(tmp_path):
    path = tmp_path / "x.bin"
    save_container(path, b"TST0", 1, "", {"a": np.zeros(1, np.float32)})
    with pytest.raises(BadMagicError):
        load_container(path, b"OTHR", 1)


def test_container_version_mismatch(tmp_path):
    path = tmp_path / "x.bin"
    save_container(path, b"TST0", 2, "", {"a": np.zeros(1, np.float32)})
    with pytest.raises(VersionError):
        load_container(path, b"TST0", 1)


def test_container_flipped_byte_fails_crc(tmp_path):
    path = tmp_path / "x.bin"
    save_container(path, b"TST0", 1, "cfg", {"a": np.arange(16, dtype=np.float32)})
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ChecksumError):
        load_container(path, b"TST0", 1)


def test_container_truncation(tmp_path):
    path = tmp_path / "x.bin"
    save_container(path, b"TST0", 1, "cfg", {"a": np.arange(64, dtype=np.float32)})
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 10])
    with pytest.raises(TruncatedError):
        load_container(path, b"TST0", 1)


# --------------------------------------------------------------------------
# triplet records
# --------------------------------------------------------------------------

def test_record_round_trip(tmp_path, mini_records):
    rec = mini_records[0]
    path = tmp_path / "r.dwt"
    serialize_record(rec, path)
    back = load_record(path)
    q = rec.quantized()
    for field in ("interaction", "static", "hand", "hand_mask"):
        assert np.array_equal(getattr(back, field), getattr(q, field)), field
    assert np.array_equal(back.hand_params, rec.hand_params)
    assert back.label == rec.label
    assert back.seed == rec.seed
    assert back.source == rec.source
    assert back.camera_traj == rec.camera_traj
    assert back.hand_traj == rec.hand_traj


def test_record_reserialization_bit_exact(tmp_path, mini_records):
    p1, p2 = tmp_path / "a.dwt", tmp_path / "b.dwt"
    serialize_record(mini_records[1], p1)
    serialize_record(load_record(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_record_header_fields(tmp_path, mini_records):
    path = tmp_path / "r.dwt"
    serialize_record(mini_records[0], path)
    raw = path.read_bytes()
    assert raw[:4] == DWT_MAGIC
    F, H, W = mini_records[0].shape
    dims = np.frombuffer(raw[6:18], dtype="<u4")
    assert tuple(dims) == (F, H, W)


def test_record_bad_magic(tmp_path, mini_records):
    path = tmp_path / "r.dwt"
    serialize_record(mini_records[0], path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(RecordMagicError):
        load_record(path)


def test_record_corruption_detected(tmp_path, mini_records):
    path = tmp_path / "r.dwt"
    serialize_record(mini_records[0], path)
    raw = bytearray(path.read_bytes())
    raw[100] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(RecordChecksumError):
        load_record(path)


def test_record_truncation_detected(tmp_path, mini_records):
    path = tmp_path / "r.dwt"
    serialize_record(mini_records[0], path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(RecordTruncatedError):
        load_record(path)


def test_record_alignment_validation(mini_records):
    import dataclasses

    rec = mini_records[0]
    bad = dataclasses.replace(rec, static=rec.static[:-1])
    with pytest.raises(ValueError):
        bad.validate_alignment()
