"""Corpus-level statistics over persistence images and chip intensities.

PCA runs as an exact dense symmetric eigendecomposition of the tiny
(bins*bins) covariance matrix: at this dimension exactness and determinism
beat iterative speed. Area-fraction curves follow the materials-science
heuristic of thresholding bright pixels, evaluated at ten evenly spaced
thresholds spanning [0, 1] inclusive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import GrayImage
from .pimage import PersistenceImage

__all__ = [
    "PCAModel",
    "AreaFractionCurve",
    "NormalizationResult",
    "pca_fit",
    "pca_project",
    "pi_distance",
    "normalize_condition",
    "area_fraction_curve",
    "mean_area_fraction",
    "default_thresholds",
    "save_pca_model",
    "load_pca_model",
]

NORMALIZATION_MODES = ("per_image_mean", "corpus_affine")


@dataclass(frozen=True)
class PCAModel:
    """Top-k principal components of a flattened-PI corpus.

    Components are orthonormal rows with a fixed sign convention (largest-
    magnitude entry positive) so repeated fits are bit-identical. Variances
    are sample variances (ddof=1) sorted descending; trailing ~0 entries
    flag rank deficiency rather than erroring.
    """

    mean: np.ndarray  # (n_features,)
    components: np.ndarray  # (k, n_features), orthonormal rows
    explained_variance: np.ndarray  # (k,), descending

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=np.float64))
        object.__setattr__(
            self, "explained_variance", np.asarray(self.explained_variance, dtype=np.float64)
        )
        if self.components.ndim != 2 or self.components.shape[1] != self.mean.shape[0]:
            raise ValueError("components must be (k, n_features) matching the mean")
        if len(self.explained_variance) != self.components.shape[0]:
            raise ValueError("one variance per component required")
        if np.any(np.diff(self.explained_variance) > 1e-12):
            raise ValueError("explained_variance must be sorted descending")

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


@dataclass(frozen=True)
class AreaFractionCurve:
    """Fraction of pixels at or above each of ten evenly spaced thresholds."""

    thresholds: np.ndarray
    fractions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        f = np.asarray(self.fractions, dtype=np.float64)
        if t.shape != f.shape or t.ndim != 1:
            raise ValueError("thresholds and fractions must be matching 1-D arrays")
        if np.any(np.diff(f) > 1e-12):
            raise ValueError("fractions must be non-increasing in threshold")
        if f.min() < 0 or f.max() > 1:
            raise ValueError("fractions must lie in [0, 1]")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "fractions", f)


@dataclass(frozen=True)
class NormalizationResult:
    """Normalized corpus plus bookkeeping about the applied transform."""

    images: tuple[GrayImage, ...]
    mode: str
    clamped_pixels: int
    target_mean: float
    scale_min: float
    scale_max: float


def default_thresholds(count: int = 10) -> np.ndarray:
    """Evenly spaced thresholds over [0, 1], endpoints included."""
    return np.linspace(0.0, 1.0, count)


def pca_fit(
    pis: list[PersistenceImage], k: int = 3, allow_degenerate: bool = False
) -> PCAModel:
    """Fit top-k components to flattened persistence images.

    A corpus with zero total variance is rejected unless
    ``allow_degenerate`` is set, in which case an identity-basis zero-
    variance model is returned.
    """
    if not pis:
        raise ValueError("cannot fit PCA to an empty corpus")
    spec = pis[0].spec
    for pi in pis[1:]:
        if pi.spec != spec:
            raise ValueError("all persistence images must share one grid spec")
    x = np.stack([pi.flatten() for pi in pis])
    n, d = x.shape
    if n < k:
        raise ValueError(f"need at least k={k} samples, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    if not np.any(cov):
        if not allow_degenerate:
            raise ValueError("corpus has zero variance; no principal directions exist")
        components = np.eye(d)[:k]
        return PCAModel(mean, components, np.zeros(k))
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    variance = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T
    components = _fix_signs(components)
    return PCAModel(mean, components, variance)


def pca_project(model: PCAModel, pi: PersistenceImage) -> np.ndarray:
    """Coordinates of one persistence image in the model's component basis."""
    flat = pi.flatten()
    if flat.shape != model.mean.shape:
        raise ValueError(
            f"feature length {flat.shape[0]} does not match model ({model.mean.shape[0]})"
        )
    return model.components @ (flat - model.mean)


def pi_distance(a: PersistenceImage, b: PersistenceImage) -> float:
    """Euclidean distance between two persistence images on one grid."""
    if a.spec != b.spec:
        raise ValueError("persistence images use different grid specs")
    return float(np.linalg.norm(a.grid - b.grid))


def normalize_condition(
    images: list[GrayImage], mode: str = "per_image_mean"
) -> NormalizationResult:
    """Normalize a condition's corpus for cross-corpus comparison.

    ``per_image_mean`` shifts every image so its pixel mean equals the
    corpus-wide pixel mean, then maps the whole corpus affinely so the
    corpus min lands on 0 and the max on 1. ``corpus_affine`` skips the
    per-image alignment and applies only the global affine map. Outputs
    are clamped to [0, 1] and the clamp count reported.
    """
    if not images:
        raise ValueError("cannot normalize an empty corpus")
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}")
    arrays = [img.pixels for img in images]
    total = sum(float(a.sum()) for a in arrays)
    count = sum(a.size for a in arrays)
    target_mean = total / count
    if mode == "per_image_mean":
        shifted = [a + (target_mean - a.mean()) for a in arrays]
    else:
        shifted = [a.copy() for a in arrays]
    lo = min(float(a.min()) for a in shifted)
    hi = max(float(a.max()) for a in shifted)
    if hi - lo <= 0:
        raise ValueError("corpus has zero intensity spread after centering")
    clamped = 0
    out = []
    for a in shifted:
        scaled = (a - lo) / (hi - lo)
        clamped += int(np.count_nonzero(scaled < 0) + np.count_nonzero(scaled > 1))
        out.append(GrayImage(np.clip(scaled, 0.0, 1.0)))
    return NormalizationResult(
        images=tuple(out),
        mode=mode,
        clamped_pixels=clamped,
        target_mean=target_mean,
        scale_min=lo,
        scale_max=hi,
    )


def area_fraction_curve(
    image: GrayImage, thresholds: np.ndarray | None = None
) -> AreaFractionCurve:
    """Fraction of pixels with intensity >= t for each threshold t."""
    t = default_thresholds() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    px = image.pixels.ravel()
    fractions = np.array([np.count_nonzero(px >= ti) / px.size for ti in t])
    return AreaFractionCurve(t, fractions)


def mean_area_fraction(
    corpus: list[GrayImage],
    sample_size: int = 1000,
    seed: int = 0,
    thresholds: np.ndarray | None = None,
) -> AreaFractionCurve:
    """Average area-fraction curve over a seeded random sample of the corpus.

    Sampling is without replacement; corpora smaller than the sample size
    are used whole. Fixed seed gives byte-identical results across runs.
    """
    if not corpus:
        raise ValueError("cannot average over an empty corpus")
    t = default_thresholds() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n = min(sample_size, len(corpus))
    idx = rng.choice(len(corpus), size=n, replace=False)
    stack = np.stack([area_fraction_curve(corpus[i], t).fractions for i in idx])
    return AreaFractionCurve(t, stack.mean(axis=0))


def save_pca_model(model: PCAModel, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "mean": model.mean.tolist(),
        "components": model.components.tolist(),
        "explained_variance": model.explained_variance.tolist(),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def load_pca_model(path: str | Path) -> PCAModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return PCAModel(
        mean=np.array(obj["mean"], dtype=np.float64),
        components=np.array(obj["components"], dtype=np.float64),
        explained_variance=np.array(obj["explained_variance"], dtype=np.float64),
    )


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    out = components.copy()
    for i, row in enumerate(out):
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            out[i] = -row
    return out
