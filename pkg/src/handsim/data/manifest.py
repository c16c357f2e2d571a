"""Manifests: record inventory, content hashes, splits, and mixing weights.

Text format, one record per line:
    id,source,split,hash,path
with optional header lines `#weight,<source>,<value>` carrying mixing weights.
Paths are relative to the manifest file's directory.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    record_id: str
    source: str
    split: str
    content_hash: str
    path: str  # relative to manifest root


@dataclass
class Manifest:
    root: str
    entries: list[ManifestEntry] = field(default_factory=list)
    weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.check_split_disjoint()

    def check_split_disjoint(self) -> None:
        seen: dict[str, str] = {}
        for e in self.entries:
            if e.record_id in seen and seen[e.record_id] != e.split:
                raise ManifestError(f"record {e.record_id} assigned to two splits")
            seen[e.record_id] = e.split

    def select(self, split: str | None = None, source: str | None = None) -> list[ManifestEntry]:
        return [e for e in self.entries
                if (split is None or e.split == split)
                and (source is None or e.source == source)]

    def record_path(self, entry: ManifestEntry) -> str:
        return os.path.join(self.root, entry.path)

    def verify(self) -> None:
        for e in self.entries:
            if content_hash(self.record_path(e)) != e.content_hash:
                raise ManifestError(f"content hash mismatch for {e.record_id}")

    def save(self, path) -> None:
        with open(path, "w") as f:
            for source, w in sorted(self.weights.items()):
                f.write(f"#weight,{source},{w!r}\n")
            for e in self.entries:
                f.write(f"{e.record_id},{e.source},{e.split},{e.content_hash},{e.path}\n")

    @classmethod
    def load(cls, path) -> "Manifest":
        root = os.path.dirname(os.path.abspath(path))
        entries: list[ManifestEntry] = []
        weights: dict[str, float] = {}
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#weight,"):
                    _, source, w = line.split(",")
                    weights[source] = float(w)
                    continue
                rid, source, split, h, p = line.split(",")
                entries.append(ManifestEntry(rid, source, split, h, p))
        return cls(root=root, entries=entries, weights=weights)


def content_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        digest.update(f.read())
    return digest.hexdigest()
