import numpy as np
import pytest

from handsim.data import (
    SOURCE_FIXED_CAM,
    SOURCE_SYN_DYNAMIC,
    Manifest,
    ManifestError,
    build_fixedcam_split,
    build_synthetic_split,
    draw_epoch,
    load_record,
    mix_hybrid,
)
from handsim.data.manifest import ManifestEntry, content_hash
from handsim.worldsim import WorldConfig

CFG = WorldConfig(world_size=48, view_size=24, num_frames=8)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    syn = build_synthetic_split(6, 100, CFG, out_dir=root, split="train")
    fix = build_fixedcam_split(4, 500, CFG, out_dir=root, split="train")
    return root, syn, fix


def test_build_assigns_sources_and_split(built):
    _, syn, fix = built
    assert all(e.source == SOURCE_SYN_DYNAMIC for e in syn.entries)
    assert all(e.source == SOURCE_FIXED_CAM for e in fix.entries)
    assert all(e.split == "train" for e in syn.entries + fix.entries)


def test_fixedcam_records_have_frozen_static(built):
    root, _, fix = built
    rec = load_record(fix.record_path(fix.entries[0]))
    assert np.ptp(rec.static, axis=0).max() == 0.0  # first frame repeated


def test_content_hashes_verify(built):
    _, syn, _ = built
    syn.verify()  # should not raise
    for e in syn.entries:
        assert len(e.content_hash) == 64


def test_verify_detects_tamper(tmp_path):
    m = build_synthetic_split(2, 900, CFG, out_dir=tmp_path, split="test")
    p = m.record_path(m.entries[0])
    raw = bytearray(open(p, "rb").read())
    raw[-1] ^= 0xFF
    open(p, "wb").write(bytes(raw))
    with pytest.raises(ManifestError):
        m.verify()


def test_double_build_identical_hashes(tmp_path):
    a = build_synthetic_split(3, 100, CFG, out_dir=tmp_path / "a", split="train")
    b = build_synthetic_split(3, 100, CFG, out_dir=tmp_path / "b", split="train")
    assert [e.content_hash for e in a.entries] == [e.content_hash for e in b.entries]
    assert [e.record_id for e in a.entries] == [e.record_id for e in b.entries]


def test_manifest_save_load_round_trip(built, tmp_path):
    _, syn, fix = built
    hybrid = mix_hybrid(syn, fix, 0.7)
    path = tmp_path / "m.manifest"
    hybrid.save(path)
    back = Manifest.load(path)
    assert back.entries == hybrid.entries
    assert back.weights == hybrid.weights


def test_split_disjointness_enforced(built):
    _, syn, _ = built
    clash = ManifestEntry(record_id=syn.entries[0].record_id, source=SOURCE_SYN_DYNAMIC,
                          split="test", content_hash=syn.entries[0].content_hash,
                          path=syn.entries[0].path)
    with pytest.raises(ManifestError):
        Manifest(root=syn.root, entries=syn.entries + [clash])


def test_select_filters(built):
    _, syn, fix = built
    hybrid = mix_hybrid(syn, fix, 0.5)
    assert len(hybrid.select(source=SOURCE_SYN_DYNAMIC)) == 6
    assert len(hybrid.select(source=SOURCE_FIXED_CAM)) == 4
    assert len(hybrid.select(split="train")) == 10
    assert hybrid.select(split="nope") == []


def test_epoch_draw_deterministic_and_weighted(built):
    _, syn, fix = built
    hybrid = mix_hybrid(syn, fix, 0.5)
    a = draw_epoch(hybrid, 7, 100)
    b = draw_epoch(hybrid, 7, 100)
    assert a == b
    assert a != draw_epoch(hybrid, 8, 100)

    # empirical mixing rate over a large draw: weight +- 0.02
    big = draw_epoch(hybrid, 0, 10_000)
    frac_syn = sum(e.source == SOURCE_SYN_DYNAMIC for e in big) / len(big)
    assert abs(frac_syn - 0.5) < 0.02

    skewed = mix_hybrid(syn, fix, 0.9)
    big = draw_epoch(skewed, 0, 10_000)
    frac_syn = sum(e.source == SOURCE_SYN_DYNAMIC for e in big) / len(big)
    assert abs(frac_syn - 0.9) < 0.02


def test_mix_weight_validation(built):
    _, syn, fix = built
    with pytest.raises(ValueError):
        mix_hybrid(syn, fix, 1.5)


def test_content_hash_is_sha256(tmp_path):
    p = tmp_path / "f.bin"
    p.write_bytes(b"abc")
    assert content_hash(p) == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")
