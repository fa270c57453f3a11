"""Line-file corpus streaming and deterministic dataset splitting.

Corpora are UTF-8 text files, one SMILES per line, optionally gzipped
(judged by the ``.gz`` extension).  Iteration streams; nothing is held in
memory.  Blank and whitespace-only lines are skipped and counted, and a
single warning reports the count when iteration finishes.

Splitting assigns each molecule to train/validation/test by hashing
``"{seed}:{index}"`` (index counts yielded molecules from zero) with
BLAKE2b, mapping the 64-bit digest to [0, 1), and bucketing against the
cumulative fractions.  The hash is pinned: assignments are stable across
platforms and releases.
"""

from __future__ import annotations

import gzip
import json
import warnings
from dataclasses import dataclass, field
from hashlib import blake2b
from typing import IO, Iterator

PARTS = ("train", "validation", "test")


class CorpusError(Exception):
    """Unreadable corpus content; message carries path and line number."""


def _open_raw(path: str, mode: str = "rb") -> IO[bytes]:
    if path.endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


@dataclass
class CorpusHandle:
    """Streaming view of one corpus file.

    Iterating yields trimmed non-empty lines in file order; every
    ``__iter__`` call opens the file afresh, so several iterations (even
    interleaved) are independent.
    """

    path: str
    skipped_blank: int = 0
    _count: int | None = field(default=None, repr=False)

    def __iter__(self) -> Iterator[str]:
        skipped = 0
        with _open_raw(self.path) as raw:
            for lineno, line in enumerate(raw, start=1):
                try:
                    text = line.decode("utf-8")
                except UnicodeDecodeError as exc:
                    raise CorpusError(
                        f"{self.path}:{lineno}: invalid UTF-8 ({exc})"
                    ) from exc
                text = text.strip()
                if not text:
                    skipped += 1
                    continue
                yield text
        self.skipped_blank = skipped
        if skipped:
            warnings.warn(
                f"{self.path}: skipped {skipped} blank line(s)",
                stacklevel=2,
            )

    def count(self) -> int:
        """Molecule count, computed on first use and cached."""
        if self._count is None:
            self._count = sum(1 for _ in self)
        return self._count


def open_corpus(path: str) -> CorpusHandle:
    """Handle over a plain or gzipped line file; existence checked now."""
    with _open_raw(path):
        pass
    return CorpusHandle(path)


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test fractions plus the assignment seed."""

    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError("fractions must be three non-negative numbers")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"fractions sum to {sum(self.fractions)}, not 1")


def split_assignment(seed: int, index: int, fractions: tuple[float, float, float]) -> int:
    """Part index (0 train, 1 validation, 2 test) for one molecule.

    Hash version 1: BLAKE2b-64 of ``"{seed}:{index}"``, little-endian,
    scaled to [0, 1).  Do not change without versioning split manifests.
    """
    digest = blake2b(f"{seed}:{index}".encode("ascii"), digest_size=8).digest()
    u = int.from_bytes(digest, "little") / 2.0**64
    edge = 0.0
    for part, fraction in enumerate(fractions[:2]):
        edge += fraction
        if u < edge:
            return part
    return 2


@dataclass
class SplitView:
    """Lazily filtered view of one split part; iterable like a handle."""

    base: CorpusHandle
    spec: SplitSpec
    part: int

    def __iter__(self) -> Iterator[str]:
        for index, molecule in enumerate(self.base):
            if split_assignment(self.spec.seed, index, self.spec.fractions) == self.part:
                yield molecule


def split_corpus(
    handle: CorpusHandle, spec: SplitSpec
) -> tuple[SplitView, SplitView, SplitView]:
    """Disjoint, exhaustive train/validation/test views over one corpus."""
    return tuple(SplitView(handle, spec, part) for part in range(3))  # type: ignore[return-value]


def write_splits(
    handle: CorpusHandle, spec: SplitSpec, out_paths: dict[str, str]
) -> dict:
    """Materialize the three parts in one pass and return the manifest.

    ``out_paths`` maps part name (train/validation/test) to a destination;
    ``.gz`` destinations are gzipped.  The manifest records the seed, the
    fractions, and the per-part counts.
    """
    if set(out_paths) != set(PARTS):
        raise ValueError(f"out_paths must name exactly {PARTS}")
    counts = dict.fromkeys(PARTS, 0)
    sinks = {}
    try:
        for part in PARTS:
            sinks[part] = _open_raw(out_paths[part], "wb")
        for index, molecule in enumerate(handle):
            part = PARTS[split_assignment(spec.seed, index, spec.fractions)]
            sinks[part].write(molecule.encode("utf-8") + b"\n")
            counts[part] += 1
    finally:
        for sink in sinks.values():
            sink.close()
    return {"seed": spec.seed, "fractions": list(spec.fractions), "counts": counts}


def write_manifest(manifest: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(manifest, handle, indent=1)
        handle.write("\n")
