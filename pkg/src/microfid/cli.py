"""Command-line interface for the microstructure fidelity toolkit.

Subcommands mirror the pipeline stages: ``chip``, ``bin``, ``ph``, ``pi``,
``pca``, ``area``, ``synthgen``, and the orchestrating ``report``. Global
flags ``--seed``, ``--workers``, and ``--out`` precede the subcommand.

Exit status for ``report`` encodes the worst outcome: 0 when every group
ran, 1 when any group was skipped, 2 on hard error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import analytics, cubical, images, manifest, pimage, report, synthgen

PRESET_CODES = {"t5_like": 5.0, "t6_like": 6.0, "custom": 0.0}
PRESET_TEMPER = {"t5_like": "T5", "t6_like": "T6"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except report.PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, manifest.ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="microfid",
        description="Topological fidelity analysis for microstructure image corpora.",
    )
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for per-chip stages")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chip", help="crop micrographs into overlapping chips")
    p.add_argument("--image", action="append", required=True, type=Path, dest="imgs")
    p.add_argument("--temper", required=True, choices=manifest.TEMPERS)
    p.add_argument("--origin", default="experimental", choices=manifest.ORIGINS)
    p.add_argument("--condition", default=None)
    p.add_argument("--value", type=float, default=None)
    p.add_argument("--chip-size", type=int, default=128)
    p.add_argument("--stride", type=int, default=64)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 16))
    p.set_defaults(func=cmd_chip)

    p = sub.add_parser("bin", help="fit tertile binning and label a manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--condition", required=True)
    p.set_defaults(func=cmd_bin)

    p = sub.add_parser("ph", help="persistence diagram per chip of a manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 16))
    p.set_defaults(func=cmd_ph)

    p = sub.add_parser("pi", help="vectorize diagram dumps into persistence images")
    p.add_argument("--diagrams", required=True, type=Path, help="directory of .dgm.csv files")
    p.add_argument("--bins-x", type=int, default=10)
    p.add_argument("--bins-y", type=int, default=10)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--birth-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--persistence-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--average", action="store_true", help="also write the corpus average")
    p.set_defaults(func=cmd_pi)

    p = sub.add_parser("pca", help="fit components to persistence images and project")
    p.add_argument("--pis", required=True, type=Path, help="directory of .pi.csv files")
    p.add_argument("--model", type=Path, default=None, help="existing model to project with")
    p.add_argument("--components", type=int, default=3)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("area", help="mean area-fraction curve of a manifest corpus")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 16))
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--norm-mode", default="per_image_mean", choices=analytics.NORMALIZATION_MODES)
    p.set_defaults(func=cmd_area)

    p = sub.add_parser("synthgen", help="generate a synthetic chip corpus with known topology")
    p.add_argument("--preset", required=True, choices=("t5_like", "t6_like"))
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--temper", default=None, choices=manifest.TEMPERS)
    p.add_argument("--condition", default="preset")
    p.add_argument("--bin-label", default=None, choices=manifest.BIN_LABELS)
    p.add_argument("--origin", default="synthetic", choices=manifest.ORIGINS)
    p.set_defaults(func=cmd_synthgen)

    p = sub.add_parser("report", help="full experimental-vs-synthetic fidelity report")
    p.add_argument("--experimental", type=Path, help="experimental manifest")
    p.add_argument("--synthetic", type=Path, help="synthetic manifest")
    p.add_argument("--config", type=Path, default=None, help="JSON config (overrides flags)")
    p.add_argument("--chip-size", type=int, default=128)
    p.add_argument("--stride", type=int, default=64)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 16))
    p.add_argument("--pi-sigma", type=float, default=0.05)
    p.add_argument("--pi-bins-x", type=int, default=10)
    p.add_argument("--pi-bins-y", type=int, default=10)
    p.add_argument("--pi-birth-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--pi-persistence-range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--norm-mode", default="per_image_mean", choices=analytics.NORMALIZATION_MODES)
    p.set_defaults(func=cmd_report)

    return parser


# ----------------------------------------------------------------------
# Subcommand implementations
# ----------------------------------------------------------------------

def cmd_chip(args) -> int:
    out = _ensure_out(args)
    spec = images.ChipSpec(chip_size=args.chip_size, stride=args.stride)
    entries = []
    for img_path in args.imgs:
        image = images.load_image(img_path, args.bit_depth)
        chips = images.extract_chips(image, spec)
        for j, chip in enumerate(chips):
            name = f"{img_path.stem}_c{j:05d}.png"
            images.save_image(chip, out / name, args.bit_depth)
            entries.append(
                manifest.ManifestEntry(
                    path=name,
                    temper=args.temper,
                    origin=args.origin,
                    condition_name=args.condition,
                    condition_value=args.value,
                )
            )
        print(f"{img_path}: {len(chips)} chips")
    manifest.save_manifest(manifest.CorpusManifest(tuple(entries)), out / "manifest.csv")
    print(f"wrote {len(entries)} chips to {out}")
    return 0


def cmd_bin(args) -> int:
    out = _ensure_out(args)
    m = manifest.load_manifest(args.manifest)
    values = [
        e.condition_value
        for e in m
        if e.condition_name == args.condition and e.condition_value is not None
    ]
    binning = manifest.fit_tertile_binning(values, args.condition)
    labeled = _reanchor_paths(manifest.assign_labels(m, binning), args.manifest.parent, out)
    n_labeled = sum(1 for e in labeled if e.bin_label is not None)
    manifest.save_manifest(labeled, out / "manifest_binned.csv")
    (out / "binning.json").write_text(
        json.dumps(binning.to_json(), indent=2) + "\n", encoding="utf-8"
    )
    counts = {
        lbl: sum(1 for e in labeled if e.bin_label == lbl) for lbl in manifest.BIN_LABELS
    }
    print(
        f"thresholds: {binning.lower_threshold} / {binning.upper_threshold}; "
        f"labeled {n_labeled}, skipped {len(m) - n_labeled}; counts {counts}"
    )
    return 0


def cmd_ph(args) -> int:
    out = _ensure_out(args)
    m = manifest.load_manifest(args.manifest)
    base = args.manifest.parent
    chips = []
    ids = []
    for i, e in enumerate(m):
        p = Path(e.path)
        if not p.is_absolute():
            p = base / p
        img = images.load_image(p, args.bit_depth)
        chips.append(img)
        ids.append(f"{i:04d}_{p.stem}")
    diagrams = report.compute_corpus_diagrams(chips, args.workers)
    for cid, dgm in zip(ids, diagrams):
        cubical.save_diagram(dgm, out / f"{cid}.dgm.csv")
    print(f"wrote {len(diagrams)} diagrams to {out}")
    return 0


def cmd_pi(args) -> int:
    out = _ensure_out(args)
    spec = pimage.PIGridSpec(
        bins_x=args.bins_x,
        bins_y=args.bins_y,
        kernel_sigma=args.sigma,
        birth_range=tuple(args.birth_range),
        persistence_range=tuple(args.persistence_range),
    )
    files = sorted(args.diagrams.glob("*.dgm.csv"))
    if not files:
        print(f"error: no .dgm.csv files in {args.diagrams}", file=sys.stderr)
        return 2
    pis = []
    for f in files:
        pi = pimage.vectorize(cubical.load_diagram(f), spec)
        pis.append(pi)
        pimage.save_pi(pi, out / (f.name.replace(".dgm.csv", ".pi.csv")))
    if args.average:
        pimage.save_pi(pimage.average_pis(pis), out / "avg.pi.csv")
    print(f"wrote {len(pis)} persistence images to {out}")
    return 0


def cmd_pca(args) -> int:
    out = _ensure_out(args)
    files = sorted(p for p in args.pis.glob("*.pi.csv") if p.name != "avg.pi.csv")
    if not files:
        print(f"error: no .pi.csv files in {args.pis}", file=sys.stderr)
        return 2
    pis = [pimage.load_pi(f) for f in files]
    if args.model is None:
        model = analytics.pca_fit(pis, k=args.components)
        analytics.save_pca_model(model, out / "pca_model.json")
        print(f"fit model on {len(pis)} images; variances {model.explained_variance.tolist()}")
    else:
        model = analytics.load_pca_model(args.model)
    rows = [(f.name.replace(".pi.csv", ""), analytics.pca_project(model, pi)) for f, pi in zip(files, pis)]
    with (out / "projections.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("chip_id,origin,temper,bin_label,pc1,pc2,pc3\n")
        for cid, vec in rows:
            coords = ",".join(repr(float(v)) for v in vec[:3])
            fh.write(f"{cid},,,,{coords}\n")
    print(f"wrote projections for {len(rows)} images to {out}")
    return 0


def cmd_area(args) -> int:
    out = _ensure_out(args)
    m = manifest.load_manifest(args.manifest)
    base = args.manifest.parent
    corpus = []
    for e in m:
        p = Path(e.path)
        if not p.is_absolute():
            p = base / p
        corpus.append(images.load_image(p, args.bit_depth))
    norm = analytics.normalize_condition(corpus, args.norm_mode)
    curve = analytics.mean_area_fraction(list(norm.images), args.sample_size, seed=args.seed)
    path = out / "area.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("threshold,mean_fraction\n")
        for t, f in zip(curve.thresholds, curve.fractions):
            fh.write(f"{float(t)!r},{float(f)!r}\n")
    print(f"wrote {path} (normalization: {norm.mode}, clamped {norm.clamped_pixels} px)")
    return 0


def cmd_synthgen(args) -> int:
    out = _ensure_out(args)
    temper = args.temper or PRESET_TEMPER[args.preset]
    chips = synthgen.make_preset_corpus(args.preset, args.count, args.size, args.size, args.seed)
    entries = []
    for i, chip in enumerate(chips):
        name = f"{args.preset}_{i:05d}.png"
        images.save_image(chip, out / name, bit_depth=8)
        entries.append(
            manifest.ManifestEntry(
                path=name,
                temper=temper,
                origin=args.origin,
                condition_name=args.condition,
                condition_value=PRESET_CODES[args.preset],
                bin_label=args.bin_label,
            )
        )
    manifest.save_manifest(manifest.CorpusManifest(tuple(entries)), out / "manifest.csv")
    print(f"wrote {len(chips)} {args.preset} chips to {out}")
    return 0


def cmd_report(args) -> int:
    if args.config is not None:
        config = report.PipelineConfig.from_json_file(args.config)
    else:
        if args.experimental is None or args.synthetic is None:
            print("error: --experimental and --synthetic (or --config) required", file=sys.stderr)
            return 2
        config = report.PipelineConfig(
            experimental_manifest=args.experimental,
            synthetic_manifest=args.synthetic,
            output_dir=args.out,
            chip_spec=images.ChipSpec(chip_size=args.chip_size, stride=args.stride),
            pi_spec=pimage.PIGridSpec(
                bins_x=args.pi_bins_x,
                bins_y=args.pi_bins_y,
                kernel_sigma=args.pi_sigma,
                birth_range=tuple(args.pi_birth_range),
                persistence_range=tuple(args.pi_persistence_range),
            ),
            seed=args.seed,
            normalization_mode=args.norm_mode,
            sample_size=args.sample_size,
            bit_depth=args.bit_depth,
            workers=args.workers,
        )
    result = report.run_pipeline(config)
    for g in result.groups:
        print(
            f"group {g.temper}/{g.condition_name}: pi_distance={g.pi_distance:.6g}, "
            f"area_gap={g.area_fraction_gap:.6g} "
            f"({g.n_experimental_chips} vs {g.n_synthetic_chips} chips)"
        )
    for s in result.skipped:
        print(f"skipped {s['temper']}/{s['condition_name']}: {s['reason']}")
    print(f"report written to {Path(config.output_dir) / 'report.json'}")
    return 0 if result.complete else 1


def _ensure_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _reanchor_paths(m: manifest.CorpusManifest, old_base: Path, new_base: Path) -> manifest.CorpusManifest:
    """Rewrite relative entry paths so they still resolve from a new manifest home."""
    entries = []
    for e in m:
        p = Path(e.path)
        if not p.is_absolute():
            resolved = (old_base / p).resolve()
            rel = os.path.relpath(resolved, new_base.resolve())
            e = dataclasses.replace(e, path=rel)
        entries.append(e)
    return manifest.CorpusManifest(tuple(entries))


if __name__ == "__main__":
    sys.exit(main())
