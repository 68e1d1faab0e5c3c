"""Procedural microstructure-like images with analytically known topology.

Bright blobs on a uniform background are the oracle corpus for the whole
pipeline: each blob fully interior to the image is encircled by background
and therefore contributes exactly one H1 class, born when the background
loop closes and dying at the blob's own peak. Plateau blobs (constant-peak
disks with a 1-pixel ramp) keep that death value exact; Gaussian blobs are
available for softer, more diffuse textures.

Two presets mimic the qualitative temper regimes: ``t5_like`` scatters many
large high-contrast blobs, ``t6_like`` uses a few faint blobs buried in
high-frequency low-amplitude noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .images import GrayImage

__all__ = [
    "Blob",
    "MicrostructureSpec",
    "PRESETS",
    "generate",
    "expected_h1_count",
    "sample_preset_spec",
    "make_preset_corpus",
]

PRESETS = ("t5_like", "t6_like", "custom")


@dataclass(frozen=True)
class Blob:
    """One bright disk: center in pixel coordinates, radius, peak intensity."""

    cx: float
    cy: float
    radius: float
    peak: float
    profile: str = "plateau"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"blob radius must be positive, got {self.radius}")
        if not 0.0 <= self.peak <= 1.0:
            raise ValueError(f"blob peak must lie in [0, 1], got {self.peak}")
        if self.profile not in ("plateau", "gaussian"):
            raise ValueError(f"unknown blob profile {self.profile!r}")


@dataclass(frozen=True)
class MicrostructureSpec:
    """Parameters of one synthetic chip; invalid geometry fails construction."""

    width: int
    height: int
    background_level: float = 0.2
    noise_amplitude: float = 0.0
    blobs: tuple[Blob, ...] = ()
    preset: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "blobs", tuple(self.blobs))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image must be at least 1x1, got {self.width}x{self.height}")
        if not 0.0 <= self.background_level <= 1.0:
            raise ValueError(f"background_level outside [0, 1]: {self.background_level}")
        if not 0.0 <= self.noise_amplitude <= 1.0:
            raise ValueError(f"noise_amplitude outside [0, 1]: {self.noise_amplitude}")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        for b in self.blobs:
            if b.peak <= self.background_level:
                raise ValueError(
                    f"blob peak {b.peak} must exceed background {self.background_level}"
                )
            # Supports are open disks (d < radius); a blob extends outside the
            # image when some out-of-grid pixel would receive brightness.
            if b.radius > min(
                b.cx + 1, b.cy + 1, self.width - b.cx, self.height - b.cy
            ):
                raise ValueError(
                    f"blob at ({b.cx}, {b.cy}) r={b.radius} extends outside the image"
                )
        for i, a in enumerate(self.blobs):
            for b in self.blobs[i + 1 :]:
                d = math.hypot(a.cx - b.cx, a.cy - b.cy)
                if d <= a.radius + b.radius + 2:
                    raise ValueError(
                        f"blobs at ({a.cx}, {a.cy}) and ({b.cx}, {b.cy}) overlap or "
                        f"sit closer than their radii + 2 ({d:.2f})"
                    )


def generate(spec: MicrostructureSpec, seed) -> GrayImage:
    """Render the spec: background, blob profiles, then seeded uniform noise.

    Deterministic for a fixed (spec, seed); noise is i.i.d. uniform on
    [-noise_amplitude, +noise_amplitude] and the result is clamped to [0, 1].
    Blob supports are disjoint by construction, and plateau interiors land
    exactly on the blob's peak value.
    """
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    img = np.full((spec.height, spec.width), spec.background_level)
    for blob in spec.blobs:
        d = np.hypot(xs - blob.cx, ys - blob.cy)
        if blob.profile == "plateau":
            s = np.clip(blob.radius - d, 0.0, 1.0)
        else:
            s = np.where(d < blob.radius, np.exp(-(d**2) / (2 * (blob.radius / 2) ** 2)), 0.0)
        img += (blob.peak - spec.background_level) * s
        img[s == 1.0] = blob.peak
    if spec.noise_amplitude > 0:
        rng = np.random.default_rng(seed)
        img = img + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, img.shape)
    return GrayImage(np.clip(img, 0.0, 1.0))


def expected_h1_count(spec: MicrostructureSpec) -> int:
    """Ground-truth H1 class count for a noise-free spec.

    Counts blobs fully interior to the image: every rendered support pixel
    keeps at least one background pixel between itself and the border, so a
    background loop encircles the blob. A blob whose support reaches the
    border row or column has no enclosing loop and is excluded.
    """
    if spec.noise_amplitude != 0:
        raise ValueError("ground truth is undefined once noise is added")
    count = 0
    for b in spec.blobs:
        # Open support: the border pixel line is untouched iff radius <=
        # distance from the center to that line.
        if b.radius <= min(
            b.cx, b.cy, spec.width - 1 - b.cx, spec.height - 1 - b.cy
        ):
            count += 1
    return count


def sample_preset_spec(
    preset: str, width: int, height: int, seed, interior_only: bool = False
) -> MicrostructureSpec:
    """Draw a randomized spec for one chip of the given preset.

    Blob centers are placed by rejection sampling under the pairwise
    separation rule; the draw is deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    if preset == "t5_like":
        params = dict(
            background=0.2,
            noise=0.02,
            target=max(2, (width * height) // 700),
            radius=(3.0, 7.0),
            peak=(0.55, 0.95),
            profile="plateau",
        )
    elif preset == "t6_like":
        params = dict(
            background=0.3,
            noise=0.08,
            target=max(1, (width * height) // 4000),
            radius=(2.0, 4.0),
            peak=(0.45, 0.7),
            profile="gaussian",
        )
    else:
        raise ValueError(f"no sampler for preset {preset!r}")

    margin_pad = 1.0 if interior_only else 0.0
    blobs: list[Blob] = []
    attempts = 0
    while len(blobs) < params["target"] and attempts < 200 * params["target"]:
        attempts += 1
        r = rng.uniform(*params["radius"])
        lo_x, hi_x = r + margin_pad, width - 1 - r - margin_pad
        lo_y, hi_y = r + margin_pad, height - 1 - r - margin_pad
        if hi_x <= lo_x or hi_y <= lo_y:
            break
        cx = rng.uniform(lo_x, hi_x)
        cy = rng.uniform(lo_y, hi_y)
        if all(
            math.hypot(cx - b.cx, cy - b.cy) > r + b.radius + 2.5 for b in blobs
        ):
            peak = rng.uniform(*params["peak"])
            blobs.append(Blob(cx, cy, r, peak, params["profile"]))
    return MicrostructureSpec(
        width=width,
        height=height,
        background_level=params["background"],
        noise_amplitude=params["noise"],
        blobs=tuple(blobs),
        preset=preset,
    )


def make_preset_corpus(
    preset: str, count: int, width: int, height: int, seed: int
) -> list[GrayImage]:
    """Generate ``count`` chips of one preset, keyed by (seed, index).

    Per-chip seeding makes generation order-independent, so a parallel map
    over indices yields the identical corpus.
    """
    chips = []
    for i in range(count):
        spec = sample_preset_spec(preset, width, height, seed=(seed, i, 0))
        chips.append(generate(spec, seed=(seed, i, 1)))
    return chips
