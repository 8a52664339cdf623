"""Builder framework, registry, and the reference builders on the fixture."""

from __future__ import annotations

import hashlib
import tarfile
from pathlib import Path

import pytest

from socks import blockpackage as bp
from socks import registry
from socks.builders.base import Builder, StageReport
from socks.errors import BuilderError
from socks.graph import ALL, Invocation
from socks.orchestrator import run
from socks.project import Project
from socks.registry import (BuilderDescriptor, CommandDescriptor,
                            get_descriptor, register_builder,
                            registered_names, unregister_builder)
from socks.validation import BlockProjectModel


def build_all(project: Project):
    report = run(project, Invocation(target=ALL, command="build"))
    assert report.outcome == "completed", vars(report)
    return report


def newest_package(project_dir: Path, block_id: str) -> Path:
    out = sorted((project_dir / "temp" / block_id / "output").glob("*.tar.gz"))
    assert out, f"no package for {block_id}"
    return out[-1]


def package_entries(path: Path) -> set[str]:
    with tarfile.open(path, "r:gz") as tar:
        return {m.name for m in tar.getmembers() if m.isfile()}


# --- registry ---------------------------------------------------------------

def test_builtin_builders_registered():
    assert {"Script_Builder", "Rootfs_Builder", "Repo_Script_Builder",
            "Import_Builder", "Image_Builder"} <= set(registered_names())


def test_duplicate_registration_rejected():
    descriptor = BuilderDescriptor(
        name="Tmp_Builder", description="x", schema=BlockProjectModel,
        commands=(CommandDescriptor("build", "building", "Builds."),))
    register_builder(descriptor, Builder)
    try:
        with pytest.raises(BuilderError, match="already registered"):
            register_builder(descriptor, Builder)
    finally:
        unregister_builder("Tmp_Builder")


def test_unknown_builder_lists_available():
    with pytest.raises(BuilderError, match="available:.*Script_Builder"):
        get_descriptor("No_Such_Builder")


def test_command_descriptor_validation():
    with pytest.raises(ValueError):
        CommandDescriptor("Bad Verb", "building", "x")
    with pytest.raises(ValueError):
        CommandDescriptor("build", "exploding", "x")


def test_instantiation_writes_nothing(project_dir):
    before = {str(p) for p in project_dir.rglob("*")}
    Project.load(project_dir / "socks.yml")
    after = {str(p) for p in project_dir.rglob("*")}
    assert before == after


# --- fixture builds ----------------------------------------------------------

def test_project_load(project):
    assert len(project.builders) == 10
    assert project.builders["kernel"].descriptor.name == "Repo_Script_Builder"
    assert project.general.container_tool == "disabled"


def test_kernel_package_contents(project, project_dir):
    report = run(project, Invocation("kernel", "build"))
    assert report.outcome == "completed"
    entries = package_entries(newest_package(project_dir, "kernel"))
    assert entries == {"Image.txt", "modules/mod1.txt"}


def test_kernel_patch_and_snippets_applied(project, project_dir):
    run(project, Invocation("kernel", "build"))
    checkout = project_dir / "temp" / "kernel" / "src"
    assert (checkout / "drivers" / "mock.c").exists()
    config = (checkout / ".config").read_text()
    assert "CONFIG_MOCK=y" in config
    assert "# CONFIG_DEBUG is not set" in config


def test_rootfs_packages_file_lists_payload_digests(project, project_dir):
    run(project, Invocation("rootfs", "build", group=True))
    with tarfile.open(newest_package(project_dir, "rootfs"), "r:gz") as tar:
        listing = tar.extractfile("packages.txt").read().decode()
    for name in ("tool-1.0.pkg", "lib-2.1.pkg"):
        digest = hashlib.sha256(
            (project_dir / "payloads" / name).read_bytes()).hexdigest()
        assert f"{name} sha256={digest}" in listing


def test_clean_removes_only_this_block(project, project_dir):
    build_all(project)
    report = run(project, Invocation("kernel", "clean"))
    assert report.outcome == "completed"
    assert not (project_dir / "temp" / "kernel").exists()
    assert (project_dir / "temp" / "vivado" / "output").exists()


def test_build_determinism_across_fresh_trees(tmp_path):
    from socks.fixture import materialize
    digests = []
    for name in ("p1", "p2"):
        pdir = materialize(tmp_path / name)
        project = Project.load(pdir / "socks.yml")
        build_all(project)
        digests.append({
            block: bp.archive_digest(newest_package(pdir, block))
            for block in project.builders
        })
    assert digests[0] == digests[1]


def test_undeclared_extra_file_not_packaged(project_dir):
    config = project_dir / "socks.yml"
    text = config.read_text().replace(
        'steps:\n        - cat "$SOCKS_SRC_DIR/Makefile"',
        'steps:\n        - touch "$SOCKS_STAGE_DIR/undeclared.txt"\n'
        '        - cat "$SOCKS_SRC_DIR/Makefile"')
    assert "undeclared" in text
    config.write_text(text, encoding="utf-8")
    project = Project.load(config)
    run(project, Invocation("kernel", "build"))
    entries = package_entries(newest_package(project_dir, "kernel"))
    assert entries == {"Image.txt", "modules/mod1.txt"}


def test_missing_declared_output_named(project_dir):
    config = project_dir / "socks.yml"
    text = config.read_text().replace(
        "      outputs:\n        - Image.txt",
        "      outputs:\n        - ghost.bin\n        - Image.txt")
    config.write_text(text, encoding="utf-8")
    project = Project.load(config)
    report = run(project, Invocation("kernel", "build"))
    assert report.outcome == "failed"
    assert "ghost.bin" in str(report.error)


def test_unsupported_verb_lists_supported(project):
    with pytest.raises(BuilderError, match="supported:"):
        project.builders["vivado"].apply("create-patches")


def test_menucfg_explains_alternative(project):
    with pytest.raises(BuilderError, match="create-cfg-snippet"):
        project.builders["kernel"].apply("menucfg")


def test_start_container_needs_containerization(project):
    report = run(project, Invocation("vivado", "start-container"))
    assert report.outcome == "failed"
    assert "disabled" in str(report.error)


def test_import_builder_corrupt_archive(project_dir, tmp_path):
    bad = tmp_path / "bp_vivado_20260101T000000Z.tar.gz"
    bad.write_bytes(b"garbage")
    config = project_dir / "socks.yml"
    config.write_text(config.read_text() + f"""\
  vivado:
    source: import
    project:
      import_src: {bad.resolve().as_uri()}
""", encoding="utf-8")
    project = Project.load(config)
    report = run(project, Invocation("vivado", "build"))
    assert report.outcome == "failed"
    assert "corrupt" in str(report.error)
    assert not (project_dir / "temp" / "vivado" / "output").exists()


def test_import_source_without_src_fails_clearly(project):
    builder = project.builders["vivado"]
    object.__setattr__(builder.spec, "source_mode", "import")
    with pytest.raises(BuilderError, match="import_src"):
        builder.run_import()


def test_rebuild_skip_after_successful_build(project, project_dir, recorder):
    build_all(project)
    recorder.reset()
    report = build_all(project)
    assert all(entry.skipped for entry in report.entries)
    assert recorder.count("build") == 0


def test_image_requires_filesystem_dependency(project_dir):
    config = project_dir / "project-zynqmp-default.yml"
    text = config.read_text().replace(
        "        rootfs: temp/rootfs/output/bp_rootfs_*.tar.gz\n", "")
    config.write_text(text, encoding="utf-8")
    from socks.errors import ValidationError
    with pytest.raises(ValidationError, match="rootfs or ramfs"):
        Project.load(project_dir / "socks.yml")
