"""Boot-image assembler: combines the packages of all other blocks.

The produced artifact is a text manifest listing, per dependency, the
emitting block, the package content digest, and the carried artifact names.
It is a verifiable stand-in for a binary boot image: any change in any
consumed package changes the manifest.
"""

from __future__ import annotations

from pydantic import model_validator

from ..registry import BuilderDescriptor, CommandDescriptor
from .base import StageReport
from .script import ScriptBuilder, ScriptProjectModel

FILESYSTEM_BLOCKS = {"rootfs", "ramfs"}


class ImageProjectModel(ScriptProjectModel):

    @model_validator(mode="after")
    def _needs_one_filesystem(self):
        if not FILESYSTEM_BLOCKS & set(self.dependencies):
            raise ValueError(
                "the image must consume at least one file-system block "
                "(rootfs or ramfs)")
        return self


class ImageBuilder(ScriptBuilder):

    IMAGE_FILE = "boot.img"

    def cmd_build(self) -> StageReport:
        if self.spec.source_mode == "import":
            return self.run_import()
        packages = self.resolve_dependencies()
        decision = self.rebuild_decision(
            sources=[p.path for p in packages.values()], packages=packages)
        if not decision.rebuild:
            return StageReport(self.block_id, "build", skipped=True)
        self.validate_dependency_contents(packages)
        self.env.ensure_image()
        self.prepare_workspace(packages)
        lines = []
        for dep_id in sorted(packages):
            pkg = packages[dep_id]
            files = ",".join(sorted(pkg.entries))
            lines.append(f"block={dep_id} digest={pkg.digest} files={files}")
        (self.stage_dir / self.IMAGE_FILE).write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8")
        package = self.finish_build(
            {self.IMAGE_FILE: self.stage_dir / self.IMAGE_FILE})
        return StageReport(self.block_id, "build",
                           artifacts=[package.path.name],
                           reasons=decision.reasons)


IMAGE_DESCRIPTOR = BuilderDescriptor(
    name="Image_Builder",
    description="Assembles the bootable image from the packages of all "
                "other blocks",
    schema=ImageProjectModel,
    commands=(
        CommandDescriptor("prepare", "building",
                          "Performs all the preparatory steps to prepare "
                          "this block for building, but does not build it."),
        CommandDescriptor("build", "building", "Builds this block."),
        CommandDescriptor("clean", "cleaning",
                          "Deletes all generated files of this block."),
        CommandDescriptor("start-container", "debugging",
                          "Starts the container image of this block in an "
                          "interactive session."),
    ),
)
