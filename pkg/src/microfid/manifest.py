"""Corpus manifests: image index with temper, condition, and bin labels.

The manifest is the join key of the whole pipeline. On disk it is a UTF-8
CSV with header ``path,temper,origin,condition_name,condition_value,bin_label``
(empty field = absent); a JSON mirror with identical field names is accepted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

__all__ = [
    "TEMPERS",
    "ORIGINS",
    "BIN_LABELS",
    "ManifestEntry",
    "CorpusManifest",
    "ConditionBinning",
    "ManifestError",
    "fit_tertile_binning",
    "assign_labels",
    "load_manifest",
    "save_manifest",
]

TEMPERS = ("T5", "T6", "as_extruded")
ORIGINS = ("experimental", "synthetic")
BIN_LABELS = ("low", "mid", "hi")

_CSV_FIELDS = ("path", "temper", "origin", "condition_name", "condition_value", "bin_label")


class ManifestError(ValueError):
    """Raised for malformed manifests or inconsistent labeling requests."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    temper: str
    origin: str
    condition_name: str | None = None
    condition_value: float | None = None
    bin_label: str | None = None

    def __post_init__(self):
        if self.temper not in TEMPERS:
            raise ManifestError(f"unknown temper {self.temper!r}")
        if self.origin not in ORIGINS:
            raise ManifestError(f"unknown origin {self.origin!r}")
        if self.bin_label is not None and self.bin_label not in BIN_LABELS:
            raise ManifestError(f"unknown bin label {self.bin_label!r}")
        if self.condition_value is not None and not math.isfinite(self.condition_value):
            raise ManifestError(f"condition value must be finite, got {self.condition_value}")
        # Untempered extrudates carry no tensile-strength measurement.
        if (
            self.temper == "as_extruded"
            and self.condition_name == "uts"
            and self.condition_value is not None
        ):
            raise ManifestError("as_extruded entries cannot carry a uts value")


@dataclass(frozen=True)
class CorpusManifest:
    """Immutable list of manifest entries."""

    entries: tuple[ManifestEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def filter(self, *, temper=None, origin=None, condition_name=None, bin_label=None) -> "CorpusManifest":
        def keep(e: ManifestEntry) -> bool:
            return (
                (temper is None or e.temper == temper)
                and (origin is None or e.origin == origin)
                and (condition_name is None or e.condition_name == condition_name)
                and (bin_label is None or e.bin_label == bin_label)
            )

        return CorpusManifest(tuple(e for e in self.entries if keep(e)))

    def groups(self) -> list[tuple[str, str]]:
        """Distinct (temper, condition_name) pairs, sorted, skipping unnamed conditions."""
        seen = {
            (e.temper, e.condition_name)
            for e in self.entries
            if e.condition_name is not None
        }
        return sorted(seen)


@dataclass(frozen=True)
class ConditionBinning:
    """Tertile thresholds mapping a scalar condition onto low / mid / hi.

    Intervals are right-closed: ``low`` is v <= lower_threshold, ``mid`` is
    lower_threshold < v <= upper_threshold, ``hi`` the rest.
    """

    condition_name: str
    lower_threshold: float
    upper_threshold: float
    labels: tuple[str, str, str] = BIN_LABELS

    def __post_init__(self):
        if self.lower_threshold > self.upper_threshold:
            raise ManifestError(
                f"thresholds out of order: {self.lower_threshold} > {self.upper_threshold}"
            )

    def label(self, value: float) -> str:
        if value <= self.lower_threshold:
            return self.labels[0]
        if value <= self.upper_threshold:
            return self.labels[1]
        return self.labels[2]

    def to_json(self) -> dict:
        return {
            "condition_name": self.condition_name,
            "lower_threshold": self.lower_threshold,
            "upper_threshold": self.upper_threshold,
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConditionBinning":
        return cls(
            condition_name=obj["condition_name"],
            lower_threshold=float(obj["lower_threshold"]),
            upper_threshold=float(obj["upper_threshold"]),
            labels=tuple(obj.get("labels", BIN_LABELS)),
        )


def fit_tertile_binning(values, condition_name: str) -> ConditionBinning:
    """Fit nearest-rank 1/3 and 2/3 quantile thresholds to observed values.

    A zero-spread value list is rejected: silently labeling everything
    ``low`` would poison downstream conditioning.
    """
    vals = sorted(float(v) for v in values)
    if len(vals) < 3:
        raise ManifestError(f"need at least 3 values to bin, got {len(vals)}")
    if vals[0] == vals[-1]:
        raise ManifestError(
            f"degenerate binning: all {len(vals)} values equal {vals[0]}"
        )
    n = len(vals)
    lower = vals[math.ceil(n / 3) - 1]
    upper = vals[math.ceil(2 * n / 3) - 1]
    return ConditionBinning(condition_name, lower, upper)


def assign_labels(manifest: CorpusManifest, binning: ConditionBinning) -> CorpusManifest:
    """Attach a bin label to every entry carrying the binned condition.

    Entries lacking a condition value (e.g. untempered extrudates under a
    uts binning) are passed through unlabeled; an entry naming a different
    condition is an error.
    """
    out = []
    for e in manifest:
        if e.condition_name is not None and e.condition_name != binning.condition_name:
            raise ManifestError(
                f"entry condition {e.condition_name!r} does not match "
                f"binning condition {binning.condition_name!r}"
            )
        if e.condition_value is None:
            out.append(e)
        else:
            out.append(replace(e, bin_label=binning.label(e.condition_value)))
    return CorpusManifest(tuple(out))


def load_manifest(path: str | Path) -> CorpusManifest:
    """Read a manifest CSV, or its JSON mirror when the suffix is .json."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        rows = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(rows, list):
            raise ManifestError(f"{path}: JSON manifest must be a list of objects")
    else:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != _CSV_FIELDS:
                raise ManifestError(
                    f"{path}: expected header {','.join(_CSV_FIELDS)}, "
                    f"got {reader.fieldnames}"
                )
            rows = list(reader)
    entries = []
    for i, row in enumerate(rows):
        try:
            entries.append(_entry_from_row(row))
        except (KeyError, ValueError) as exc:
            raise ManifestError(f"{path}: row {i + 1}: {exc}") from exc
    return CorpusManifest(tuple(entries))


def save_manifest(manifest: CorpusManifest, path: str | Path) -> Path:
    """Write the CSV form, or the JSON mirror when the suffix is .json."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        rows = [_entry_to_row(e) for e in manifest]
        path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        return path
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for e in manifest:
            row = _entry_to_row(e)
            writer.writerow([_fmt(row[f]) for f in _CSV_FIELDS])
    return path


def _entry_from_row(row: dict) -> ManifestEntry:
    def blank(v):
        return v is None or (isinstance(v, str) and v.strip() == "")

    value = row.get("condition_value")
    return ManifestEntry(
        path=str(row["path"]),
        temper=str(row["temper"]),
        origin=str(row["origin"]),
        condition_name=None if blank(row.get("condition_name")) else str(row["condition_name"]),
        condition_value=None if blank(value) else float(value),
        bin_label=None if blank(row.get("bin_label")) else str(row["bin_label"]),
    )


def _entry_to_row(e: ManifestEntry) -> dict:
    return {
        "path": e.path,
        "temper": e.temper,
        "origin": e.origin,
        "condition_name": e.condition_name,
        "condition_value": e.condition_value,
        "bin_label": e.bin_label,
    }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
