"""Surgical edits to the project configuration file.

Used when new patch or snippet files are created: the new names are appended
to the block's list while every untouched line keeps its original formatting.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import ConfigError


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip(" "))


def _find_key(lines: list[str], key: str, start: int, end: int,
              min_indent: int) -> int | None:
    pattern = re.compile(rf"^(\s*){re.escape(key)}:")
    for idx in range(start, end):
        line = lines[idx]
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if _indent(line) <= min_indent and idx != start:
            return None
        match = pattern.match(line)
        if match and _indent(line) > min_indent:
            return idx
    return None


def _section_end(lines: list[str], start: int, indent: int) -> int:
    for idx in range(start + 1, len(lines)):
        line = lines[idx]
        if line.strip() and not line.lstrip().startswith("#") \
                and _indent(line) <= indent:
            return idx
    return len(lines)


def append_to_block_list(config_path: str | Path, block_id: str, key: str,
                         items: list[str]) -> None:
    """Append ``items`` to ``blocks/<block_id>/project/<key>`` in place."""
    config_path = Path(config_path)
    lines = config_path.read_text(encoding="utf-8").splitlines()

    blocks_idx = next(
        (i for i, l in enumerate(lines) if re.match(r"^blocks:\s*(#.*)?$", l)),
        None)
    if blocks_idx is None:
        raise ConfigError("no 'blocks:' section found", key_path="blocks",
                          origin=str(config_path))
    blocks_end = _section_end(lines, blocks_idx, 0)

    block_idx = _find_key(lines, block_id, blocks_idx + 1, blocks_end, 0)
    if block_idx is None:
        raise ConfigError(f"block '{block_id}' not found in this file",
                          key_path=f"blocks/{block_id}", origin=str(config_path))
    block_indent = _indent(lines[block_idx])
    block_end = _section_end(lines, block_idx, block_indent)

    project_idx = _find_key(lines, "project", block_idx + 1, block_end,
                            block_indent)
    if project_idx is None:
        raise ConfigError(f"block '{block_id}' has no 'project' section",
                          key_path=f"blocks/{block_id}/project",
                          origin=str(config_path))
    project_indent = _indent(lines[project_idx])
    project_end = _section_end(lines, project_idx, project_indent)

    key_idx = _find_key(lines, key, project_idx + 1, project_end,
                        project_indent)
    if key_idx is None:
        # No list yet: create it directly under 'project:'.
        child_indent = project_indent + 2
        new = [f"{' ' * child_indent}{key}:"]
        new += [f"{' ' * (child_indent + 2)}- {item}" for item in items]
        lines[project_idx + 1:project_idx + 1] = new
    else:
        key_indent = _indent(lines[key_idx])
        key_line = lines[key_idx]
        if re.match(rf"^\s*{re.escape(key)}:\s*\[\s*\]\s*(#.*)?$", key_line):
            item_indent = key_indent + 2
            lines[key_idx] = f"{' ' * key_indent}{key}:"
            new = [f"{' ' * item_indent}- {item}" for item in items]
            lines[key_idx + 1:key_idx + 1] = new
        else:
            # Walk past existing '- item' lines to find the insertion point.
            insert_at = key_idx + 1
            item_indent = key_indent + 2
            idx = key_idx + 1
            while idx < len(lines):
                line = lines[idx]
                if not line.strip():
                    idx += 1
                    continue
                if line.lstrip().startswith("- ") and _indent(line) > key_indent:
                    item_indent = _indent(line)
                    insert_at = idx + 1
                    idx += 1
                    continue
                break
            new = [f"{' ' * item_indent}- {item}" for item in items]
            lines[insert_at:insert_at] = new

    config_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
