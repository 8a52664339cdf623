"""Builder for blocks whose general sources live in a git repository.

On top of the script builder it clones the configured repository, applies
the project's patch series and Kconfig-style config snippets before the
build steps run, and can export local commits / .config edits back into the
project as new patch and snippet files.
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict

from ..configedit import append_to_block_list
from ..errors import BuilderError
from ..registry import BuilderDescriptor, CommandDescriptor
from ..sources import (SourceRef, SourceState, apply_config_snippets,
                       apply_patches, create_config_snippet,
                       create_patches_from_commits, sync_source)
from .base import StageReport
from .script import ScriptBuilder, ScriptProjectModel


class BuildSrcsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source: str
    branch: str = ""


class RepoProjectModel(ScriptProjectModel):
    build_srcs: BuildSrcsModel
    patches: list[str] = []
    config_snippets: list[str] = []
    kconfig_file: str = ".config"


class RepoScriptBuilder(ScriptBuilder):
    """Script builder with git sources, patch series, and config snippets."""

    @property
    def checkout_dir(self) -> Path:
        return self.work_dir / "src"

    @property
    def files_dir(self) -> Path:
        """Project source files of this block (patches, snippets)."""
        return self.project_dir / "src" / self.block_id

    @property
    def source_state(self) -> SourceState:
        return SourceState(self.work_dir / "source.state")

    @property
    def kconfig_path(self) -> Path:
        return self.checkout_dir / self.spec.builder_specific["kconfig_file"]

    @property
    def kconfig_baseline(self) -> Path:
        return self.work_dir / "kconfig.last"

    def source_ref(self) -> SourceRef:
        srcs = self.spec.builder_specific["build_srcs"]
        source = srcs["source"]
        # Local repository paths are relative to the project folder.
        if "://" not in source and "@" not in source \
                and not Path(source).is_absolute():
            source = str(self.project_dir / source)
        return SourceRef(source=source, branch=srcs.get("branch", ""),
                         checkout_dir=self.checkout_dir)

    def patch_files(self) -> list[Path]:
        return [self.files_dir / name
                for name in self.spec.builder_specific.get("patches", [])]

    def snippet_files(self) -> list[Path]:
        return [self.files_dir / name
                for name in
                self.spec.builder_specific.get("config_snippets", [])]

    def source_paths(self) -> list[Path]:
        return super().source_paths() + [self.checkout_dir, self.files_dir]

    def step_env(self, packages) -> dict[str, str]:
        env = super().step_env(packages)
        env["SOCKS_SRC_DIR"] = self.env.translate_path(self.checkout_dir)
        return env

    def sync_sources(self) -> None:
        self.work_dir.mkdir(parents=True, exist_ok=True)
        sync_source(self.source_ref(), self.event_log, self.source_state)
        apply_patches(self.checkout_dir, self.patch_files(), self.event_log,
                      self.source_state)
        snippets = self.snippet_files()
        if snippets:
            apply_config_snippets(self.kconfig_path, snippets)
        if self.kconfig_path.exists():
            self.kconfig_baseline.write_bytes(self.kconfig_path.read_bytes())

    # -- configuring commands ------------------------------------------------

    def cmd_create_patches(self) -> StageReport:
        if not (self.checkout_dir / ".git").exists():
            raise BuilderError(
                f"block '{self.block_id}' has no checkout yet; "
                f"run 'prepare' or 'build' first")
        existing = self.spec.builder_specific.get("patches", [])
        created = create_patches_from_commits(
            self.checkout_dir, self.files_dir, len(existing),
            self.source_state)
        if not created:
            return StageReport(self.block_id, "create-patches", skipped=True,
                               reasons=["no new commits"])
        append_to_block_list(self.context.config_file, self.block_id,
                             "patches", created)
        return StageReport(self.block_id, "create-patches", artifacts=created)

    def cmd_create_cfg_snippet(self) -> StageReport:
        if not self.kconfig_path.exists():
            raise BuilderError(
                f"no {self.spec.builder_specific['kconfig_file']} in the "
                f"checkout of block '{self.block_id}'")
        existing = self.spec.builder_specific.get("config_snippets", [])
        name = f"cfg-snippet-{len(existing) + 1:04d}.cfg"
        changed = create_config_snippet(
            self.kconfig_path, self.kconfig_baseline, self.files_dir / name)
        if not changed:
            return StageReport(self.block_id, "create-cfg-snippet",
                               skipped=True, reasons=["no config changes"])
        append_to_block_list(self.context.config_file, self.block_id,
                             "config_snippets", [name])
        self.kconfig_baseline.write_bytes(self.kconfig_path.read_bytes())
        return StageReport(self.block_id, "create-cfg-snippet",
                           artifacts=[name])

    def cmd_menucfg(self) -> StageReport:
        raise BuilderError(
            "the interactive menuconfig tool is not available in this "
            "builder; edit the .config file in the checkout and run "
            "create-cfg-snippet instead")


REPO_COMMANDS = (
    CommandDescriptor("prepare", "building",
                      "Performs all the preparatory steps to prepare this "
                      "block for building, but does not build it."),
    CommandDescriptor("build", "building", "Builds this block."),
    CommandDescriptor("clean", "cleaning",
                      "Deletes all generated files of this block."),
    CommandDescriptor("create-patches", "configuring",
                      "Uses the committed changes in this block's repo to "
                      "create patch files."),
    CommandDescriptor("create-cfg-snippet", "configuring",
                      "Creates a configuration snippet from the changes in "
                      "the .config file in this block's repo."),
    CommandDescriptor("start-container", "debugging",
                      "Starts the container image of this block in an "
                      "interactive session."),
    CommandDescriptor("menucfg", "configuring",
                      "Opens the menuconfig tool to enable interactive "
                      "configuration of the project in this block."),
)

REPO_DESCRIPTOR = BuilderDescriptor(
    name="Repo_Script_Builder",
    description="Builds a block from a git repository with project patches "
                "and config snippets",
    schema=RepoProjectModel,
    commands=REPO_COMMANDS,
)
