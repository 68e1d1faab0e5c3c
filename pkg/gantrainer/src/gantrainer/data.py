"""Manifest and chip I/O matching the fidelity toolkit's file formats.

The trainer talks to the analysis toolkit only through files: it consumes
the CSV manifest schema ``path,temper,origin,condition_name,condition_value,
bin_label`` (empty field = absent) plus 8-bit grayscale PNG chips, and its
sampler emits the same formats back.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

MANIFEST_FIELDS = ("path", "temper", "origin", "condition_name", "condition_value", "bin_label")
TEMPER_INDEX = {"T5": 0, "T6": 1}
BIN_INDEX = {"low": 0, "mid": 1, "hi": 2}


@dataclass(frozen=True)
class ChipRecord:
    path: Path
    temper: str
    bin_label: str

    @property
    def temper_index(self) -> int:
        return TEMPER_INDEX[self.temper]

    @property
    def bin_index(self) -> int:
        return BIN_INDEX[self.bin_label]


def read_manifest_rows(path: str | Path) -> list[dict]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != MANIFEST_FIELDS:
            raise ValueError(
                f"{path}: expected manifest header {','.join(MANIFEST_FIELDS)}, "
                f"got {reader.fieldnames}"
            )
        return list(reader)


def load_training_records(manifest_path: str | Path, condition_name: str) -> list[ChipRecord]:
    """Labeled chips for one conditioning variable.

    Entries must carry a temper in {T5, T6} and a bin label; untempered
    extrudates cannot be embedded (the temper table has exactly two rows)
    and are rejected rather than silently dropped.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    records = []
    for i, row in enumerate(read_manifest_rows(manifest_path)):
        if (row.get("condition_name") or "") != condition_name:
            raise ValueError(
                f"row {i + 1}: condition {row.get('condition_name')!r} does not "
                f"match requested {condition_name!r}"
            )
        temper = row.get("temper") or ""
        if temper not in TEMPER_INDEX:
            raise ValueError(
                f"row {i + 1}: temper {temper!r} is not embeddable (expected T5 or T6)"
            )
        bin_label = row.get("bin_label") or ""
        if bin_label not in BIN_INDEX:
            raise ValueError(f"row {i + 1}: missing or unknown bin label {bin_label!r}")
        p = Path(row["path"])
        records.append(ChipRecord(p if p.is_absolute() else base / p, temper, bin_label))
    if not records:
        raise ValueError(f"{manifest_path}: empty corpus")
    return records


def load_chip_tensor(record: ChipRecord, image_size: int) -> torch.Tensor:
    """One chip as a (1, H, W) float tensor in [0, 1]."""
    with Image.open(record.path) as im:
        im.load()
        if im.mode != "L":
            raise ValueError(f"{record.path}: expected 8-bit grayscale, got {im.mode}")
        arr = np.asarray(im, dtype=np.float32) / 255.0
    if arr.shape != (image_size, image_size):
        raise ValueError(
            f"{record.path}: chip is {arr.shape[1]}x{arr.shape[0]}, "
            f"config expects {image_size}x{image_size}"
        )
    return torch.from_numpy(arr).unsqueeze(0)


def load_corpus(records: list[ChipRecord], image_size: int):
    """Stack a whole corpus: images (n,1,H,W), temper and bin index tensors."""
    images = torch.stack([load_chip_tensor(r, image_size) for r in records])
    tempers = torch.tensor([r.temper_index for r in records], dtype=torch.long)
    bins = torch.tensor([r.bin_index for r in records], dtype=torch.long)
    return images, tempers, bins


def write_manifest(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_FIELDS)
        for row in rows:
            writer.writerow([row.get(f) if row.get(f) is not None else "" for f in MANIFEST_FIELDS])
    return path


def save_chip_png(image: torch.Tensor, path: str | Path) -> Path:
    """Write a (1, H, W) tensor in [0, 1] as an 8-bit grayscale PNG."""
    arr = image.detach().squeeze(0).clamp(0.0, 1.0).cpu().numpy()
    Image.fromarray(np.rint(arr * 255.0).astype(np.uint8)).save(path, format="PNG")
    return Path(path)
