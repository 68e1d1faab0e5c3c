"""Persistence images: fixed-size vectorization of persistence diagrams.

Each diagram point (birth, death) is mapped to (birth, persistence) and
spread over a fixed grid with an isotropic Gaussian kernel, weighted
linearly by persistence so that near-diagonal noise vanishes. Grid ranges
are pinned to [0, 1] x [0, 1]: chip intensities are pre-normalized, and a
shared grid is what makes persistence images from different corpora
directly comparable and averageable.

The kernel is integrated exactly over each bin (the Gaussian is separable,
so a bin's mass is a product of two normal-CDF differences). Points outside
the grid ranges still contribute through their Gaussian tails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .cubical import PersistenceDiagram

__all__ = [
    "PIGridSpec",
    "PersistenceImage",
    "vectorize",
    "average_pis",
    "save_pi",
    "load_pi",
]


@dataclass(frozen=True)
class PIGridSpec:
    """Grid geometry and kernel parameters for persistence images."""

    bins_x: int = 10
    bins_y: int = 10
    birth_range: tuple[float, float] = (0.0, 1.0)
    persistence_range: tuple[float, float] = (0.0, 1.0)
    kernel_sigma: float = 0.05
    weight: str = "linear_persistence"

    def __post_init__(self):
        if self.bins_x < 1 or self.bins_y < 1:
            raise ValueError("bins_x and bins_y must be >= 1")
        if self.kernel_sigma <= 0:
            raise ValueError(f"kernel_sigma must be > 0, got {self.kernel_sigma}")
        if self.birth_range[0] >= self.birth_range[1]:
            raise ValueError(f"degenerate birth_range {self.birth_range}")
        if self.persistence_range[0] >= self.persistence_range[1]:
            raise ValueError(f"degenerate persistence_range {self.persistence_range}")
        if self.weight != "linear_persistence":
            raise ValueError(f"unknown weight function {self.weight!r}")
        object.__setattr__(self, "birth_range", tuple(float(v) for v in self.birth_range))
        object.__setattr__(
            self, "persistence_range", tuple(float(v) for v in self.persistence_range)
        )

    def birth_edges(self) -> np.ndarray:
        return np.linspace(self.birth_range[0], self.birth_range[1], self.bins_x + 1)

    def persistence_edges(self) -> np.ndarray:
        return np.linspace(
            self.persistence_range[0], self.persistence_range[1], self.bins_y + 1
        )

    def point_weight(self, persistence: float) -> float:
        """Linear weight, zero at zero persistence, 1 at the range maximum."""
        return persistence / self.persistence_range[1]

    def to_json(self) -> dict:
        d = asdict(self)
        d["birth_range"] = list(self.birth_range)
        d["persistence_range"] = list(self.persistence_range)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "PIGridSpec":
        return cls(
            bins_x=int(obj["bins_x"]),
            bins_y=int(obj["bins_y"]),
            birth_range=tuple(obj["birth_range"]),
            persistence_range=tuple(obj["persistence_range"]),
            kernel_sigma=float(obj["kernel_sigma"]),
            weight=obj.get("weight", "linear_persistence"),
        )


@dataclass(frozen=True)
class PersistenceImage:
    """Nonnegative (bins_y, bins_x) grid; row 0 is the lowest-persistence row."""

    grid: np.ndarray
    spec: PIGridSpec

    def __post_init__(self):
        arr = np.asarray(self.grid, dtype=np.float64)
        if arr.shape != (self.spec.bins_y, self.spec.bins_x):
            raise ValueError(
                f"grid shape {arr.shape} does not match spec "
                f"({self.spec.bins_y}, {self.spec.bins_x})"
            )
        if arr.min() < 0:
            raise ValueError("persistence image entries must be nonnegative")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "grid", arr)

    def flatten(self) -> np.ndarray:
        """Row-major feature vector (length bins_x * bins_y)."""
        return self.grid.ravel().copy()

    def total_mass(self) -> float:
        return float(self.grid.sum())


def vectorize(diagram: PersistenceDiagram, spec: PIGridSpec | None = None) -> PersistenceImage:
    """Render a diagram as a persistence image on the given grid."""
    spec = spec or PIGridSpec()
    grid = np.zeros((spec.bins_y, spec.bins_x))
    if len(diagram) == 0:
        return PersistenceImage(grid, spec)
    pts = diagram.as_array()
    births = pts[:, 0]
    persistences = pts[:, 1] - pts[:, 0]
    bx = spec.birth_edges()
    py = spec.persistence_edges()
    sigma = spec.kernel_sigma
    for b, p in zip(births, persistences):
        mass_x = np.diff(ndtr((bx - b) / sigma))
        mass_y = np.diff(ndtr((py - p) / sigma))
        grid += spec.point_weight(p) * np.outer(mass_y, mass_x)
    return PersistenceImage(grid, spec)


def average_pis(pis: list[PersistenceImage]) -> PersistenceImage:
    """Entrywise arithmetic mean of persistence images sharing one spec."""
    if not pis:
        raise ValueError("cannot average an empty list of persistence images")
    spec = pis[0].spec
    for pi in pis[1:]:
        if pi.spec != spec:
            raise ValueError(f"mismatched grid specs: {pi.spec} vs {spec}")
    # Mean relative to the first grid: exact when all inputs are identical
    # and better conditioned when they are close.
    base = pis[0].grid
    stack = np.stack([pi.grid - base for pi in pis])
    mean = base + stack.mean(axis=0)
    return PersistenceImage(np.clip(mean, 0.0, None), spec)


def save_pi(pi: PersistenceImage, path: str | Path) -> Path:
    """Write the grid as CSV (row 0 = lowest persistence) plus a JSON sidecar."""
    path = Path(path)
    lines = [",".join(repr(v) for v in row) for row in pi.grid.tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = path.with_suffix(path.suffix + ".spec.json")
    sidecar.write_text(json.dumps(pi.spec.to_json(), indent=2) + "\n", encoding="utf-8")
    return path


def load_pi(path: str | Path) -> PersistenceImage:
    path = Path(path)
    grid = np.array(
        [
            [float(v) for v in line.split(",")]
            for line in path.read_text(encoding="utf-8").strip().splitlines()
        ]
    )
    sidecar = path.with_suffix(path.suffix + ".spec.json")
    spec = PIGridSpec.from_json(json.loads(sidecar.read_text(encoding="utf-8")))
    return PersistenceImage(grid, spec)
