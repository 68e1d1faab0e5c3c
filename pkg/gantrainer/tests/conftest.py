"""Fixtures: labeled chip corpora produced through the analysis CLI."""

from __future__ import annotations

import shutil
import subprocess

import pytest


def microfid_cli() -> str:
    exe = shutil.which("microfid")
    if exe is None:
        raise RuntimeError(
            "the `microfid` CLI must be installed: the trainer consumes its "
            "manifests and chips (pip install -e .. from the repository root)"
        )
    return exe


def make_labeled_corpus(directory, count=8, size=32, seed=900, preset="t5_like",
                        condition="feed_rate", bin_label="low"):
    """Render a synthetic chip corpus with temper + bin labels via the CLI."""
    subprocess.run(
        [
            microfid_cli(), "--seed", str(seed), "--out", str(directory),
            "synthgen", "--preset", preset, "--count", str(count),
            "--size", str(size), "--condition", condition, "--bin-label", bin_label,
        ],
        check=True,
        capture_output=True,
    )
    return directory / "manifest.csv"


@pytest.fixture(scope="session")
def corpus32(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus32")
    return make_labeled_corpus(root, count=8, size=32)


@pytest.fixture(scope="session")
def corpus16(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus16")
    return make_labeled_corpus(root, count=6, size=16)


def pytest_runtest_logreport(report):
    """Print one pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    print(f"\nACCEPTANCE {status}: {name}")
