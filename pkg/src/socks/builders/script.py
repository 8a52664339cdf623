"""Generic script builder: ordered shell steps over declared inputs and
dependency packages, producing declared output artifacts.

Stands in for tool-specific builders: any block whose build can be expressed
as bash steps can use it.  The rootfs variant additionally injects
user-provided binary packages into the produced file-system artifact.
"""

from __future__ import annotations

import hashlib
import shutil
import urllib.request
from pathlib import Path
from urllib.parse import urlparse

from ..errors import BuilderError
from ..registry import BuilderDescriptor, CommandDescriptor
from ..validation import BlockProjectModel, ContentRuleModel
from .base import Builder, StageReport

ConsumeRuleModel = ContentRuleModel


class ScriptProjectModel(BlockProjectModel):
    inputs: list[str] = []
    steps: list[str] = []
    outputs: list[str] = []
    consumes: dict[str, ConsumeRuleModel] = {}


class RootfsProjectModel(ScriptProjectModel):
    extra_packages: list[str] = []


class ScriptBuilder(Builder):
    """Runs configured shell steps in the block's environment."""

    def source_paths(self) -> list[Path]:
        paths = [self.project_dir / p
                 for p in self.spec.builder_specific.get("inputs", [])]
        return paths

    def step_env(self, packages) -> dict[str, str]:
        env = self.env
        return {
            "SOCKS_BLOCK_ID": self.block_id,
            "SOCKS_PROJECT_DIR": env.translate_path(self.project_dir),
            "SOCKS_WORK_DIR": env.translate_path(self.work_dir),
            "SOCKS_STAGE_DIR": env.translate_path(self.stage_dir),
            "SOCKS_DEPS_DIR": env.translate_path(self.deps_dir),
        }

    def prepare_workspace(self, packages) -> None:
        if self.stage_dir.exists():
            shutil.rmtree(self.stage_dir)
        self.stage_dir.mkdir(parents=True, exist_ok=True)
        self.import_dependencies(packages)

    def run_steps(self, packages) -> None:
        env = self.step_env(packages)
        for step in self.spec.builder_specific.get("steps", []):
            self.env.run(step, workdir=self.work_dir, env=env)

    def collect_outputs(self) -> dict[str, Path]:
        files: dict[str, Path] = {}
        for declared in self.spec.builder_specific.get("outputs", []):
            path = self.stage_dir / declared
            if not path.is_file():
                raise BuilderError(
                    f"block '{self.block_id}' declared output '{declared}' "
                    f"but the build steps did not produce it")
            files[declared] = path
        return files

    def stage_extras(self) -> None:
        """Hook for variants that add artifacts beyond the shell steps."""

    def sync_sources(self) -> None:
        """Hook for variants that fetch general source files."""

    def cmd_build(self) -> StageReport:
        if self.spec.source_mode == "import":
            return self.run_import()
        packages = self.resolve_dependencies()
        # Dependency archives count as sources: a freshly rebuilt dependency
        # must propagate downstream even when its content is unchanged.
        sources = self.source_paths() + [p.path for p in packages.values()]
        decision = self.rebuild_decision(sources=sources, packages=packages)
        if not decision.rebuild:
            return StageReport(self.block_id, "build", skipped=True)
        self.validate_dependency_contents(packages)
        self.env.ensure_image()
        self.work_dir.mkdir(parents=True, exist_ok=True)
        self.sync_sources()
        self.prepare_workspace(packages)
        self.run_steps(packages)
        self.stage_extras()
        package = self.finish_build(self.collect_outputs())
        return StageReport(self.block_id, "build", artifacts=[package.path.name],
                           reasons=decision.reasons)

    def cmd_prepare(self) -> StageReport:
        self.env.ensure_image()
        self.sync_sources()
        return StageReport(self.block_id, "prepare")


class RootfsBuilder(ScriptBuilder):
    """Script builder that records injected user packages in the artifact."""

    PACKAGES_FILE = "packages.txt"

    def extra_package_refs(self) -> list[str]:
        return self.spec.builder_specific.get("extra_packages", [])

    def source_paths(self) -> list[Path]:
        paths = super().source_paths()
        for ref in self.extra_package_refs():
            if urlparse(ref).scheme not in ("http", "https", "file"):
                paths.append(self.project_dir / ref)
        return paths

    def _fetch_extra(self, ref: str) -> Path:
        scheme = urlparse(ref).scheme
        if scheme in ("http", "https", "file"):
            self.imports_dir.mkdir(parents=True, exist_ok=True)
            name = Path(urlparse(ref).path).name or "payload"
            dest = self.imports_dir / name
            try:
                with urllib.request.urlopen(ref) as resp, \
                        open(dest, "wb") as out:
                    shutil.copyfileobj(resp, out)
            except OSError as exc:
                raise BuilderError(
                    f"cannot fetch extra package {ref!r}: {exc}") from exc
            return dest
        path = self.project_dir / ref
        if not path.is_file():
            raise BuilderError(f"extra package not found: {ref!r}")
        return path

    def stage_extras(self) -> None:
        lines = []
        for ref in self.extra_package_refs():
            payload = self._fetch_extra(ref)
            digest = hashlib.sha256(payload.read_bytes()).hexdigest()
            lines.append(f"{payload.name} sha256={digest}")
        (self.stage_dir / self.PACKAGES_FILE).write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8")

    def collect_outputs(self) -> dict[str, Path]:
        files = super().collect_outputs()
        files[self.PACKAGES_FILE] = self.stage_dir / self.PACKAGES_FILE
        return files


SCRIPT_COMMANDS = (
    CommandDescriptor("prepare", "building",
                      "Performs all the preparatory steps to prepare this "
                      "block for building, but does not build it."),
    CommandDescriptor("build", "building", "Builds this block."),
    CommandDescriptor("clean", "cleaning",
                      "Deletes all generated files of this block."),
    CommandDescriptor("start-container", "debugging",
                      "Starts the container image of this block in an "
                      "interactive session."),
)

SCRIPT_DESCRIPTOR = BuilderDescriptor(
    name="Script_Builder",
    description="Builds a block by running configured shell steps",
    schema=ScriptProjectModel,
    commands=SCRIPT_COMMANDS,
)

ROOTFS_DESCRIPTOR = BuilderDescriptor(
    name="Rootfs_Builder",
    description="Builds a root file system artifact and installs "
                "user-provided packages into it",
    schema=RootfsProjectModel,
    commands=SCRIPT_COMMANDS,
    shares_container_group="filesystem",
)
