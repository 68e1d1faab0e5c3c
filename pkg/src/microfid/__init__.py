"""Topological fidelity analysis for grayscale microstructure image corpora."""

__version__ = "0.1.0"

from .images import ChipSpec, GrayImage, extract_chips, load_image, save_image
from .manifest import (
    ConditionBinning,
    CorpusManifest,
    ManifestEntry,
    assign_labels,
    fit_tertile_binning,
    load_manifest,
    save_manifest,
)
from .cubical import (
    PersistenceDiagram,
    brute_force_persistence,
    build_filtration,
    compute_persistence,
    persistence_of_chip,
)
from .pimage import PersistenceImage, PIGridSpec, average_pis, vectorize
from .analytics import (
    AreaFractionCurve,
    PCAModel,
    area_fraction_curve,
    mean_area_fraction,
    normalize_condition,
    pca_fit,
    pca_project,
    pi_distance,
)
from .synthgen import MicrostructureSpec, Blob, expected_h1_count, generate
from .report import FidelityReport, PipelineConfig, run_pipeline
