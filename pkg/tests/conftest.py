"""Shared fixtures and acceptance-suite reporting hooks."""

from __future__ import annotations

import numpy as np
import pytest

from microfid.images import GrayImage


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_chip(rng, width, height, lo=0.0, hi=1.0) -> GrayImage:
    return GrayImage(lo + (hi - lo) * rng.random((height, width)))


def pytest_runtest_logreport(report):
    """Print one pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    print(f"\nACCEPTANCE {status}: {name}")
