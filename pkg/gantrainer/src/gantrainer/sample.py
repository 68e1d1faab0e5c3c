"""Checkpoint sampling: emit PNG chips plus a manifest the analysis CLI accepts."""

from __future__ import annotations

from pathlib import Path

import torch

from .data import BIN_INDEX, TEMPER_INDEX, save_chip_png, write_manifest
from .model import NOISE_DIM
from .train import load_generator

__all__ = ["sample"]


def sample(
    checkpoint_dir: str | Path,
    temper: str,
    bin_label: str,
    n: int,
    seed: int,
    out_dir: str | Path,
) -> Path:
    """Generate n chips for one (temper, bin) conditioning, deterministically.

    Writes `<temper>_<bin>_<i>.png` files and a `manifest.csv` with
    origin=synthetic and the checkpoint's condition name; returns the
    manifest path.
    """
    if temper not in TEMPER_INDEX:
        raise ValueError(f"unknown temper {temper!r} (expected one of {list(TEMPER_INDEX)})")
    if bin_label not in BIN_INDEX:
        raise ValueError(f"unknown bin label {bin_label!r} (expected one of {list(BIN_INDEX)})")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")

    generator, config = load_generator(checkpoint_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    if n > 0:
        rng = torch.Generator().manual_seed(seed)
        noise = torch.randn(n, NOISE_DIM, generator=rng)
        t_idx = torch.full((n,), TEMPER_INDEX[temper], dtype=torch.long)
        b_idx = torch.full((n,), BIN_INDEX[bin_label], dtype=torch.long)
        with torch.no_grad():
            images = generator(noise, t_idx, b_idx)
        for i in range(n):
            name = f"{temper}_{bin_label}_{i:05d}.png"
            save_chip_png(images[i], out_dir / name)
            rows.append(
                {
                    "path": name,
                    "temper": temper,
                    "origin": "synthetic",
                    "condition_name": config.condition_name,
                    "condition_value": None,
                    "bin_label": bin_label,
                }
            )
    return write_manifest(rows, out_dir / "manifest.csv")
