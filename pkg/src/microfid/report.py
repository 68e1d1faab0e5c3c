"""End-to-end corpus fidelity pipeline: manifests in, report + artifacts out.

For every (temper, condition) group present in both manifests the pipeline
runs chips -> persistence diagrams -> persistence images, averages the
images per corpus, fits PCA to the experimental side only, projects both
corpora onto those experimentally-fit components, and compares area-fraction
curves of the normalized corpora. Groups present on only one side are
recorded as skipped rather than failing the run.

All randomness flows from the config seed, and per-chip work is a pure
function of the chip, so results are independent of worker count and two
runs with the same config produce byte-identical report JSON.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytics import (
    AreaFractionCurve,
    PCAModel,
    mean_area_fraction,
    normalize_condition,
    pca_fit,
    pca_project,
    pi_distance,
    save_pca_model,
)
from .cubical import PersistenceDiagram, persistence_of_chip
from .images import ChipSpec, GrayImage, extract_chips, load_image
from .manifest import CorpusManifest, ManifestEntry, load_manifest
from .pimage import PersistenceImage, PIGridSpec, average_pis, save_pi, vectorize
from .svg import heatmap_pair_svg, line_chart_svg, scatter_panels_svg, write_svg

__all__ = [
    "PipelineConfig",
    "GroupResult",
    "FidelityReport",
    "PipelineError",
    "run_pipeline",
    "emit_plots",
    "compute_corpus_pis",
]

SCHEMA_VERSION = 1


class PipelineError(RuntimeError):
    """Hard pipeline failure, carrying group context where applicable."""


@dataclass(frozen=True)
class PipelineConfig:
    experimental_manifest: Path
    synthetic_manifest: Path
    output_dir: Path
    chip_spec: ChipSpec = ChipSpec()
    pi_spec: PIGridSpec = PIGridSpec()
    conditions: tuple[tuple[str, str], ...] = ()  # (condition_name, temper) filters
    seed: int = 0
    normalization_mode: str = "per_image_mean"
    sample_size: int = 1000
    bit_depth: int = 8
    workers: int = 1
    pca_components: int = 3

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PipelineConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        chip = obj.get("chip_spec", {})
        pi = obj.get("pi_spec", {})
        return cls(
            experimental_manifest=Path(obj["experimental_manifest"]),
            synthetic_manifest=Path(obj["synthetic_manifest"]),
            output_dir=Path(obj["output_dir"]),
            chip_spec=ChipSpec(**chip),
            pi_spec=PIGridSpec.from_json(pi) if pi else PIGridSpec(),
            conditions=tuple((c, t) for c, t in obj.get("conditions", [])),
            seed=int(obj.get("seed", 0)),
            normalization_mode=obj.get("normalization_mode", "per_image_mean"),
            sample_size=int(obj.get("sample_size", 1000)),
            bit_depth=int(obj.get("bit_depth", 8)),
            workers=int(obj.get("workers", 1)),
            pca_components=int(obj.get("pca_components", 3)),
        )


@dataclass
class GroupResult:
    temper: str
    condition_name: str
    n_experimental_chips: int
    n_synthetic_chips: int
    avg_pi_experimental: PersistenceImage
    avg_pi_synthetic: PersistenceImage
    pi_distance: float
    pca_model: PCAModel
    projections_experimental: list[tuple[str, str | None, np.ndarray]]
    projections_synthetic: list[tuple[str, str | None, np.ndarray]]
    area_experimental: AreaFractionCurve
    area_synthetic: AreaFractionCurve
    area_fraction_gap: float
    clamped_pixels: dict[str, int]
    artifacts: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> str:
        return f"{self.temper}_{self.condition_name}"


@dataclass
class FidelityReport:
    groups: list[GroupResult]
    skipped: list[dict]
    seed: int
    normalization_mode: str
    output_dir: Path
    schema_version: int = SCHEMA_VERSION

    @property
    def complete(self) -> bool:
        return not self.skipped

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "normalization_mode": self.normalization_mode,
            "groups": [
                {
                    "temper": g.temper,
                    "condition_name": g.condition_name,
                    "n_experimental_chips": g.n_experimental_chips,
                    "n_synthetic_chips": g.n_synthetic_chips,
                    "pi_distance": g.pi_distance,
                    "area_fraction_gap": g.area_fraction_gap,
                    "clamped_pixels": g.clamped_pixels,
                    "explained_variance": g.pca_model.explained_variance.tolist(),
                    "artifacts": dict(sorted(g.artifacts.items())),
                }
                for g in self.groups
            ],
            "skipped": self.skipped,
        }


def run_pipeline(config: PipelineConfig) -> FidelityReport:
    """Execute the full fidelity comparison described by the config."""
    exp_manifest = load_manifest(config.experimental_manifest)
    syn_manifest = load_manifest(config.synthetic_manifest)
    exp_groups = set(exp_manifest.groups())
    syn_groups = set(syn_manifest.groups())

    wanted = exp_groups | syn_groups
    if config.conditions:
        requested = {(t, c) for c, t in config.conditions}
        wanted &= requested
    groups = sorted(wanted)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results: list[GroupResult] = []
    skipped: list[dict] = []
    for temper, condition in groups:
        missing = []
        if (temper, condition) not in exp_groups:
            missing.append("experimental")
        if (temper, condition) not in syn_groups:
            missing.append("synthetic")
        if missing:
            skipped.append(
                {
                    "temper": temper,
                    "condition_name": condition,
                    "reason": f"group absent from {' and '.join(missing)} manifest",
                }
            )
            continue
        try:
            results.append(
                _run_group(
                    config,
                    out_dir,
                    temper,
                    condition,
                    exp_manifest.filter(temper=temper, condition_name=condition),
                    syn_manifest.filter(temper=temper, condition_name=condition),
                )
            )
        except Exception as exc:
            raise PipelineError(f"group {temper}/{condition}: {exc}") from exc

    report = FidelityReport(
        groups=results,
        skipped=skipped,
        seed=config.seed,
        normalization_mode=config.normalization_mode,
        output_dir=out_dir,
    )
    emit_plots(report)
    report_path = out_dir / "report.json"
    report_path.write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


def emit_plots(report: FidelityReport) -> list[Path]:
    """Write the per-group SVG figures and record them in the report."""
    out_dir = Path(report.output_dir)
    paths = []
    for g in report.groups:
        heat = out_dir / f"pi_heatmaps_{g.key}.svg"
        write_svg(
            heatmap_pair_svg(
                g.avg_pi_experimental.grid,
                g.avg_pi_synthetic.grid,
                f"experimental {g.key}",
                f"synthetic {g.key}",
            ),
            heat,
        )
        scatter = out_dir / f"pca_scatter_{g.key}.svg"
        exp_pts = np.array([v for _, _, v in g.projections_experimental]).reshape(-1, 3)
        syn_pts = np.array([v for _, _, v in g.projections_synthetic]).reshape(-1, 3)
        write_svg(
            scatter_panels_svg(exp_pts, syn_pts, "experimental", "synthetic"),
            scatter,
        )
        area = out_dir / f"area_fractions_{g.key}.svg"
        write_svg(
            line_chart_svg(
                g.area_experimental.thresholds,
                [
                    ("experimental", g.area_experimental.fractions),
                    ("synthetic", g.area_synthetic.fractions),
                ],
                "threshold",
                "area fraction",
            ),
            area,
        )
        for name, p in (("pi_heatmaps", heat), ("pca_scatter", scatter), ("area_chart", area)):
            g.artifacts[name] = p.name
        paths.extend([heat, scatter, area])
    return paths


def compute_corpus_pis(
    chips: list[GrayImage], pi_spec: PIGridSpec, workers: int = 1
) -> list[PersistenceImage]:
    """Persistence image per chip; parallel across chips when workers > 1."""
    diagrams = compute_corpus_diagrams(chips, workers)
    return [vectorize(d, pi_spec) for d in diagrams]


def compute_corpus_diagrams(
    chips: list[GrayImage], workers: int = 1
) -> list[PersistenceDiagram]:
    if workers <= 1 or len(chips) < 4:
        return [persistence_of_chip(c) for c in chips]
    arrays = [c.pixels for c in chips]
    chunk = max(1, len(arrays) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        points = list(pool.map(_diagram_points, arrays, chunksize=chunk))
    return [PersistenceDiagram(p) for p in points]


def _diagram_points(pixels: np.ndarray) -> tuple:
    return persistence_of_chip(GrayImage(pixels)).points


# ----------------------------------------------------------------------
# Group execution
# ----------------------------------------------------------------------

def _run_group(
    config: PipelineConfig,
    out_dir: Path,
    temper: str,
    condition: str,
    exp_entries: CorpusManifest,
    syn_entries: CorpusManifest,
) -> GroupResult:
    key = f"{temper}_{condition}"
    exp_chips, exp_ids = _load_group_chips(config, config.experimental_manifest, exp_entries)
    syn_chips, syn_ids = _load_group_chips(config, config.synthetic_manifest, syn_entries)
    if not exp_chips or not syn_chips:
        raise ValueError("empty chip corpus after chipping")

    exp_pis = compute_corpus_pis(exp_chips, config.pi_spec, config.workers)
    syn_pis = compute_corpus_pis(syn_chips, config.pi_spec, config.workers)

    avg_exp = average_pis(exp_pis)
    avg_syn = average_pis(syn_pis)
    dist = pi_distance(avg_exp, avg_syn)

    # The component basis comes from the experimental corpus alone; the
    # synthetic corpus is only ever projected onto it.
    model = pca_fit(exp_pis, k=config.pca_components, allow_degenerate=True)
    proj_exp = [
        (cid, lbl, pca_project(model, pi))
        for (cid, lbl), pi in zip(exp_ids, exp_pis)
    ]
    proj_syn = [
        (cid, lbl, pca_project(model, pi))
        for (cid, lbl), pi in zip(syn_ids, syn_pis)
    ]

    norm_exp = normalize_condition(exp_chips, config.normalization_mode)
    norm_syn = normalize_condition(syn_chips, config.normalization_mode)
    area_exp = mean_area_fraction(
        list(norm_exp.images), config.sample_size, seed=config.seed
    )
    area_syn = mean_area_fraction(
        list(norm_syn.images), config.sample_size, seed=config.seed
    )
    gap = float(np.max(np.abs(area_exp.fractions - area_syn.fractions)))

    result = GroupResult(
        temper=temper,
        condition_name=condition,
        n_experimental_chips=len(exp_chips),
        n_synthetic_chips=len(syn_chips),
        avg_pi_experimental=avg_exp,
        avg_pi_synthetic=avg_syn,
        pi_distance=dist,
        pca_model=model,
        projections_experimental=proj_exp,
        projections_synthetic=proj_syn,
        area_experimental=area_exp,
        area_synthetic=area_syn,
        area_fraction_gap=gap,
        clamped_pixels={
            "experimental": norm_exp.clamped_pixels,
            "synthetic": norm_syn.clamped_pixels,
        },
    )
    _write_group_artifacts(out_dir, key, result)
    return result


def _load_group_chips(
    config: PipelineConfig, manifest_path: Path, entries: CorpusManifest
) -> tuple[list[GrayImage], list[tuple[str, str | None]]]:
    base = Path(manifest_path).parent
    chips: list[GrayImage] = []
    ids: list[tuple[str, str | None]] = []
    for i, entry in enumerate(entries):
        p = Path(entry.path)
        if not p.is_absolute():
            p = base / p
        image = load_image(p, config.bit_depth)
        for j, chip in enumerate(extract_chips(image, config.chip_spec)):
            chips.append(chip)
            ids.append((f"{i:04d}_{p.stem}_c{j:04d}", entry.bin_label))
    return chips, ids


def _write_group_artifacts(out_dir: Path, key: str, g: GroupResult) -> None:
    exp_pi_path = out_dir / f"avg_pi_experimental_{key}.csv"
    syn_pi_path = out_dir / f"avg_pi_synthetic_{key}.csv"
    save_pi(g.avg_pi_experimental, exp_pi_path)
    save_pi(g.avg_pi_synthetic, syn_pi_path)

    model_path = out_dir / f"pca_model_{key}.json"
    save_pca_model(g.pca_model, model_path)

    proj_path = out_dir / f"projections_{key}.csv"
    with proj_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("chip_id", "origin", "temper", "bin_label", "pc1", "pc2", "pc3"))
        for origin, rows in (
            ("experimental", g.projections_experimental),
            ("synthetic", g.projections_synthetic),
        ):
            for cid, lbl, vec in rows:
                writer.writerow(
                    (cid, origin, g.temper, lbl or "", repr(vec[0]), repr(vec[1]), repr(vec[2]))
                )

    area_paths = {}
    for origin, curve in (
        ("experimental", g.area_experimental),
        ("synthetic", g.area_synthetic),
    ):
        path = out_dir / f"area_{origin}_{key}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("threshold", "mean_fraction"))
            for t, f in zip(curve.thresholds, curve.fractions):
                writer.writerow((repr(float(t)), repr(float(f))))
        area_paths[origin] = path

    g.artifacts.update(
        {
            "avg_pi_experimental": exp_pi_path.name,
            "avg_pi_synthetic": syn_pi_path.name,
            "pca_model": model_path.name,
            "projections": proj_path.name,
            "area_experimental": area_paths["experimental"].name,
            "area_synthetic": area_paths["synthetic"].name,
        }
    )
