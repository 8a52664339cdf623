"""Shared fixtures: materialized example projects and invocation recording."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from socks import environment
from socks.fixture import materialize
from socks.project import Project

# Tests that commit to git repos need an identity even on bare CI hosts.
os.environ.setdefault("GIT_AUTHOR_NAME", "tester")
os.environ.setdefault("GIT_AUTHOR_EMAIL", "tester@example.com")
os.environ.setdefault("GIT_COMMITTER_NAME", "tester")
os.environ.setdefault("GIT_COMMITTER_EMAIL", "tester@example.com")


@pytest.fixture
def project_dir(tmp_path: Path) -> Path:
    """A fresh materialized copy of the zynqmp-mock example project."""
    return materialize(tmp_path / "proj")


@pytest.fixture
def project(project_dir: Path) -> Project:
    return Project.load(project_dir / "socks.yml")


class InvocationRecorder:
    """Collects every external invocation the environment layer makes."""

    def __init__(self):
        self.calls: list[tuple[str, list[str]]] = []

    def __call__(self, kind: str, argv: list[str]) -> None:
        self.calls.append((kind, list(argv)))

    def count(self, kind: str) -> int:
        return sum(1 for k, _ in self.calls if k == kind)

    def reset(self) -> None:
        self.calls.clear()


@pytest.fixture
def recorder():
    rec = InvocationRecorder()
    environment.add_invocation_observer(rec)
    yield rec
    environment.remove_invocation_observer(rec)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, desc): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            if report.passed:
                status = "PASS"
            elif report.skipped:
                status = "SKIP"
            else:
                status = "FAIL"
            print(f"\n[acceptance criterion {marker.args[0]}] {status}: "
                  f"{marker.args[1]}")
