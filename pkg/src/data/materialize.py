"""Corrupted test sets on disk, described by a tab-separated manifest."""

import csv
import io
import logging
from pathlib import Path
from typing import List, Sequence

from pydantic import BaseModel

from ..core.exceptions import FormatError
from ..core.files import PathLike, atomic_write_text
from ..core.types import CorruptionKind
from ..corruption.kinds import CorruptionSpec, corrupt_dataset
from .dataset import Dataset
from .idx import load_idx, write_idx_pair

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"
IMAGES_NAME = "images-idx3-ubyte"
LABELS_NAME = "labels-idx1-ubyte"


class ManifestEntry(BaseModel):
    kind: CorruptionKind
    severity: int
    seed: int
    path: str

    @property
    def spec(self) -> CorruptionSpec:
        return CorruptionSpec(kind=self.kind, severity=self.severity, seed=self.seed)


def split_dir(out_dir: PathLike, spec: CorruptionSpec) -> Path:
    return Path(out_dir) / "corrupted" / spec.kind.value / str(spec.severity)


def materialize_corrupted(
    dataset: Dataset, specs: Sequence[CorruptionSpec], out_dir: PathLike
) -> List[ManifestEntry]:
    """
    Write ``corrupted/<kind>/<severity>/`` IDX pairs under ``out_dir`` and a
    manifest with one ``kind, severity, seed, relative path`` row per spec.
    """
    out_dir = Path(out_dir)
    entries = []
    for spec in specs:
        target = split_dir(out_dir, spec)
        corrupted = corrupt_dataset(dataset, spec)
        write_idx_pair(corrupted, target / IMAGES_NAME, target / LABELS_NAME)
        entries.append(
            ManifestEntry(
                kind=spec.kind,
                severity=spec.severity,
                seed=spec.seed,
                path=target.relative_to(out_dir).as_posix(),
            )
        )
        logger.info(f"Materialized {spec.kind.value}@{spec.severity} to {target}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter="\t", lineterminator="\n")
    for entry in entries:
        writer.writerow([entry.kind.value, entry.severity, entry.seed, entry.path])
    atomic_write_text(out_dir / MANIFEST_NAME, buffer.getvalue())
    return entries


def read_manifest(out_dir: PathLike) -> List[ManifestEntry]:
    path = Path(out_dir) / MANIFEST_NAME
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e})")
    entries = []
    rows = csv.reader(io.StringIO(text), delimiter="\t")
    for number, row in enumerate(rows, start=1):
        if len(row) != 4:
            raise FormatError(
                f"{path}:{number}: expected 4 tab-separated fields, got {len(row)}"
            )
        kind, severity, seed, relative = row
        try:
            entries.append(
                ManifestEntry(
                    kind=CorruptionKind(kind),
                    severity=int(severity),
                    seed=int(seed),
                    path=relative,
                )
            )
        except ValueError as e:
            raise FormatError(f"{path}:{number}: bad field ({e})")
    return entries


def load_materialized(
    out_dir: PathLike, entry: ManifestEntry, name: str = "mnist"
) -> Dataset:
    directory = Path(out_dir) / entry.path
    return load_idx(
        directory / IMAGES_NAME,
        directory / LABELS_NAME,
        name=name,
        split=f"test-{entry.kind.value}-{entry.severity}",
    )
