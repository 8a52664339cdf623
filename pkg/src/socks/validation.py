"""Typed validation of the processed configuration tree.

The general section is checked against a registered project type (which
defines the mandatory block set and optional-block groups for one SoC
architecture).  Each block section is checked against a common model plus the
builder-specific schema supplied by the block's builder.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import pydantic
from pydantic import BaseModel, ConfigDict

from .configtree import ConfigTree
from .errors import ValidationError

CONTAINER_TOOLS = ("docker", "podman", "disabled")
ALL_CORES = "all-cores"


@dataclass(frozen=True)
class ProjectType:
    """Block-completeness rules for one SoC architecture."""

    name: str
    mandatory_blocks: tuple[str, ...]
    # Each group requires at least one of its members to be configured.
    optional_groups: tuple[frozenset[str], ...] = ()


_PROJECT_TYPES: dict[str, ProjectType] = {}


def register_project_type(ptype: ProjectType) -> None:
    _PROJECT_TYPES[ptype.name] = ptype


def project_type(name: str) -> ProjectType:
    if name not in _PROJECT_TYPES:
        known = ", ".join(sorted(_PROJECT_TYPES)) or "(none)"
        raise ValidationError(
            f"unknown project type '{name}' (registered: {known})",
            key_path="project/type")
    return _PROJECT_TYPES[name]


register_project_type(ProjectType(
    name="ZynqMP",
    mandatory_blocks=("atf", "devicetree", "fsbl", "image", "kernel",
                      "pmu_fw", "uboot", "vivado"),
    optional_groups=(frozenset({"ramfs", "rootfs"}),),
))


@dataclass(frozen=True)
class GeneralSettings:
    project_type: str
    project_name: str
    container_tool: str = "docker"
    toolset_version: str = ""
    max_threads: int | str = ALL_CORES

    def effective_threads(self) -> int:
        if self.max_threads == ALL_CORES:
            return os.cpu_count() or 1
        return int(self.max_threads)


@dataclass(frozen=True)
class BlockSpec:
    block_id: str
    builder_name: str
    source_mode: str = "build"
    import_src: str | None = None
    container_image: str = ""
    container_tag: str = ""
    dependencies: dict[str, str] = field(default_factory=dict)
    builder_specific: dict = field(default_factory=dict)


class ContainerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    image: str
    tag: str = "socks"


class CommonBlockModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source: str = "build"
    builder: str
    container: ContainerModel
    project: dict = {}


class ContentRuleModel(BaseModel):
    """Declarative content rule: globs a block package must/may contain."""

    model_config = ConfigDict(extra="forbid")
    required: list[str] = []
    optional: list[str] = []


class BlockProjectModel(BaseModel):
    """Base schema for the builder-specific ``project`` subtree.

    Builders subclass this and add their own fields; unknown keys are
    rejected so typos surface at validation time.
    """

    model_config = ConfigDict(extra="forbid")
    import_src: str | None = None
    dependencies: dict[str, str] = {}
    emits: ContentRuleModel = ContentRuleModel()


def _pydantic_error(exc: pydantic.ValidationError, base_path: str,
                    tree: ConfigTree) -> ValidationError:
    first = exc.errors()[0]
    loc = "/".join(str(part) for part in first["loc"])
    key_path = f"{base_path}/{loc}" if loc else base_path
    return ValidationError(first["msg"], key_path=key_path,
                           origin=tree.origin(key_path))


def validate_general(tree: ConfigTree) -> GeneralSettings:
    """Validate the general section and block-set completeness."""
    for required in ("project/type", "project/name"):
        if not tree.has(required):
            raise ValidationError("missing required key", key_path=required,
                                  origin=tree.source_file)
    ptype_name = tree.get("project/type")
    ptype = project_type(str(ptype_name))

    tool = tree.get("external_tools/container_tool", "docker")
    if tool not in CONTAINER_TOOLS:
        raise ValidationError(
            f"container_tool must be one of {CONTAINER_TOOLS}, got {tool!r}",
            key_path="external_tools/container_tool",
            origin=tree.origin("external_tools/container_tool"))

    max_threads = tree.get("external_tools/max_threads", ALL_CORES)
    if max_threads != ALL_CORES:
        if not isinstance(max_threads, int) or max_threads < 1:
            raise ValidationError(
                f"max_threads must be a positive int or '{ALL_CORES}'",
                key_path="external_tools/max_threads",
                origin=tree.origin("external_tools/max_threads"))

    blocks = tree.get("blocks", None)
    if not isinstance(blocks, dict) or not blocks:
        raise ValidationError("the 'blocks' section must be a non-empty mapping",
                              key_path="blocks", origin=tree.origin("blocks"))
    for block_id in ptype.mandatory_blocks:
        if block_id not in blocks:
            raise ValidationError(f"missing mandatory block: {block_id}",
                                  key_path=f"blocks/{block_id}",
                                  origin=tree.origin("blocks"))
    for group in ptype.optional_groups:
        if not group & set(blocks):
            names = ", ".join(sorted(group))
            raise ValidationError(
                f"at least one of the blocks {{{names}}} must be configured",
                key_path="blocks", origin=tree.origin("blocks"))

    return GeneralSettings(
        project_type=str(ptype_name),
        project_name=str(tree.get("project/name")),
        container_tool=str(tool),
        toolset_version=str(tree.get("external_tools/xilinx/version", "")),
        max_threads=max_threads,
    )


def validate_block(tree: ConfigTree, block_id: str,
                   schema: type[BlockProjectModel] | None = None) -> BlockSpec:
    """Validate one block section; ``schema`` is the builder's project model.

    With ``schema=None`` only the common fields are checked and the project
    subtree is retained opaque.
    """
    base_path = f"blocks/{block_id}"
    section = tree.get(base_path, None)
    if not isinstance(section, dict):
        raise ValidationError("block section missing or not a mapping",
                              key_path=base_path, origin=tree.origin(base_path))
    try:
        common = CommonBlockModel.model_validate(section)
    except pydantic.ValidationError as exc:
        raise _pydantic_error(exc, base_path, tree) from exc

    if common.source not in ("build", "import"):
        raise ValidationError(
            f"source must be 'build' or 'import', got {common.source!r}",
            key_path=f"{base_path}/source",
            origin=tree.origin(f"{base_path}/source"))

    project_section = common.project
    if schema is not None:
        try:
            model = schema.model_validate(project_section)
        except pydantic.ValidationError as exc:
            raise _pydantic_error(exc, f"{base_path}/project", tree) from exc
        import_src = model.import_src
        dependencies = dict(model.dependencies)
        builder_specific = model.model_dump()
    else:
        import_src = project_section.get("import_src")
        deps = project_section.get("dependencies", {})
        if not isinstance(deps, dict):
            raise ValidationError(
                "dependencies must be a mapping of block id to path/URL",
                key_path=f"{base_path}/project/dependencies",
                origin=tree.origin(f"{base_path}/project/dependencies"))
        dependencies = dict(deps)
        builder_specific = dict(project_section)

    if common.source == "import" and not import_src:
        raise ValidationError(
            "import_src is required when source is 'import'",
            key_path=f"{base_path}/project/import_src",
            origin=tree.origin(f"{base_path}/project"))

    for dep_id, ref in dependencies.items():
        if not isinstance(ref, str):
            raise ValidationError(
                "dependency reference must be a string",
                key_path=f"{base_path}/project/dependencies/{dep_id}",
                origin=tree.origin(f"{base_path}/project/dependencies/{dep_id}"))
        if ref.startswith("/"):
            raise ValidationError(
                "dependency paths must be relative to the project folder "
                "(or URLs), never absolute host paths",
                key_path=f"{base_path}/project/dependencies/{dep_id}",
                origin=tree.origin(f"{base_path}/project/dependencies/{dep_id}"))

    return BlockSpec(
        block_id=block_id,
        builder_name=common.builder,
        source_mode=common.source,
        import_src=import_src,
        container_image=common.container.image,
        container_tag=common.container.tag,
        dependencies=dependencies,
        builder_specific=builder_specific,
    )
