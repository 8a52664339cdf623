"""Project configuration tree: loading, import merging, placeholder
resolution, and canonical rendering.

A project is configured in a single YAML file.  Top-level ``import:`` lists
further YAML files whose trees are deep-merged underneath the importing file
(importing file > later import > earlier import).  String values may embed
``{{slash/path}}`` placeholders referring to scalar leaves anywhere in the
merged tree; resolution runs after the full merge, so definition order across
files is irrelevant.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, CycleError

Scalar = str | int | float | bool | None

PLACEHOLDER_RE = re.compile(r"\{\{([A-Za-z0-9_./-]+)\}\}")
IMPORT_KEY = "import"


@dataclass
class ConfigTree:
    """Nested mapping of configuration data plus per-path origin info.

    ``origins`` maps slash-separated key paths to ``"file:line"`` strings of
    the merge source that supplied the value.  Trees are treated as immutable
    values: every processing step returns a new tree.
    """

    root: dict[str, Any]
    origins: dict[str, str] = field(default_factory=dict)
    source_file: str | None = None

    def get(self, path: str, default: Any = ...) -> Any:
        node: Any = self.root
        for part in path.split("/"):
            if not isinstance(node, dict) or part not in node:
                if default is ...:
                    raise ConfigError("missing configuration key",
                                      key_path=path, origin=self.source_file)
                return default
            node = node[part]
        return node

    def has(self, path: str) -> bool:
        return self._present(path)

    def _present(self, path: str) -> bool:
        node: Any = self.root
        for part in path.split("/"):
            if not isinstance(node, dict) or part not in node:
                return False
            node = node[part]
        return True

    def origin(self, path: str) -> str | None:
        while path:
            if path in self.origins:
                return self.origins[path]
            path = path.rsplit("/", 1)[0] if "/" in path else ""
        return self.source_file


def _collect_origins(node: Any, path: str, mark_file: str,
                     yaml_node: yaml.Node | None, out: dict[str, str]) -> None:
    line = yaml_node.start_mark.line + 1 if yaml_node is not None else 0
    out[path or ""] = f"{mark_file}:{line}"
    if isinstance(node, dict):
        value_nodes = {}
        if isinstance(yaml_node, yaml.MappingNode):
            for k_node, v_node in yaml_node.value:
                value_nodes[k_node.value] = v_node
        for key, value in node.items():
            child = f"{path}/{key}" if path else key
            _collect_origins(value, child, mark_file, value_nodes.get(key), out)


def load_project(path: str | Path) -> ConfigTree:
    """Load one YAML file into a raw, unresolved tree with origin info."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigError(f"YAML parse error: {exc}", origin=where) from exc
    if not isinstance(data, dict):
        raise ConfigError("root must be a mapping", origin=str(path))
    origins: dict[str, str] = {}
    _collect_origins(data, "", str(path), node, origins)
    return ConfigTree(root=data, origins=origins, source_file=str(path))


def _deep_merge(base: dict, overlay: dict) -> dict:
    out = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _merge_trees(base: ConfigTree, overlay: ConfigTree) -> ConfigTree:
    merged = _deep_merge(base.root, overlay.root)
    origins = dict(base.origins)
    origins.update(overlay.origins)
    return ConfigTree(root=merged, origins=origins,
                      source_file=overlay.source_file or base.source_file)


def resolve_imports(tree: ConfigTree, base_dir: str | Path,
                    _stack: tuple[str, ...] = ()) -> ConfigTree:
    """Recursively merge all imported files underneath ``tree``.

    Precedence: importing file > later import > earlier import.  Import
    cycles are detected across the whole chain.
    """
    base_dir = Path(base_dir)
    own = str(Path(tree.source_file).resolve()) if tree.source_file else None
    if own is not None:
        if own in _stack:
            chain = list(_stack[_stack.index(own):]) + [own]
            raise CycleError(
                "import cycle: " + " -> ".join(chain), chain, origin=own)
        _stack = _stack + (own,)

    imports = tree.root.get(IMPORT_KEY)
    if imports is None:
        return tree
    if not isinstance(imports, list) or not all(isinstance(i, str) for i in imports):
        raise ConfigError("'import' must be a list of file paths",
                          key_path=IMPORT_KEY, origin=tree.origin(IMPORT_KEY))

    accumulated: ConfigTree | None = None
    for entry in imports:
        entry_path = Path(entry)
        if not entry_path.is_absolute():
            entry_path = base_dir / entry_path
        if not entry_path.exists():
            raise ConfigError(
                f"imported file not found: {entry} "
                f"(imported by {tree.source_file})",
                key_path=IMPORT_KEY, origin=tree.origin(IMPORT_KEY))
        imported = load_project(entry_path)
        imported = resolve_imports(imported, entry_path.parent, _stack)
        accumulated = imported if accumulated is None \
            else _merge_trees(accumulated, imported)

    top = ConfigTree(
        root={k: v for k, v in tree.root.items() if k != IMPORT_KEY},
        origins={k: v for k, v in tree.origins.items() if
                 k != IMPORT_KEY and not k.startswith(IMPORT_KEY + "/")},
        source_file=tree.source_file)
    return _merge_trees(accumulated, top) if accumulated is not None else top


def _walk_strings(node: Any, path: str = ""):
    if isinstance(node, dict):
        for key, value in node.items():
            yield from _walk_strings(value, f"{path}/{key}" if path else key)
    elif isinstance(node, list):
        for idx, value in enumerate(node):
            yield from _walk_strings(value, f"{path}/{idx}")
    elif isinstance(node, str):
        yield path, node


def _scalar_text(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _find_placeholder_cycle(tree: ConfigTree) -> list[str]:
    refs: dict[str, list[str]] = {}
    for path, text in _walk_strings(tree.root):
        refs[path] = PLACEHOLDER_RE.findall(text)
    seen: set[str] = set()

    def dfs(node: str, stack: list[str]) -> list[str] | None:
        if node in stack:
            return stack[stack.index(node):] + [node]
        if node in seen:
            return None
        seen.add(node)
        for ref in refs.get(node, []):
            found = dfs(ref, stack + [node])
            if found:
                return found
        return None

    for start in refs:
        cycle = dfs(start, [])
        if cycle:
            return cycle
    return []


def resolve_placeholders(tree: ConfigTree) -> ConfigTree:
    """Replace every ``{{path}}`` in string leaves with the referenced scalar.

    Iterates to a fixpoint bounded by the number of string leaves; exceeding
    the bound means a reference cycle, which is reported with its chain.
    """
    root = json.loads(json.dumps(tree.root))  # deep copy, keeps scalars plain

    def substitute(text: str, at_path: str) -> str:
        def repl(match: re.Match) -> str:
            ref = match.group(1)
            probe = ConfigTree(root, source_file=tree.source_file)
            if not probe._present(ref):
                raise ConfigError(
                    f"placeholder references missing key '{ref}'",
                    key_path=at_path, origin=tree.origin(at_path))
            value = probe.get(ref)
            if isinstance(value, (dict, list)):
                raise ConfigError(
                    f"placeholder must reference a scalar, "
                    f"but '{ref}' is a {type(value).__name__}",
                    key_path=at_path, origin=tree.origin(at_path))
            return _scalar_text(value)
        return PLACEHOLDER_RE.sub(repl, text)

    def apply_round() -> int:
        changed = 0
        for path, text in list(_walk_strings(root)):
            new = substitute(text, path)
            if new != text:
                _set_path(root, path, new)
                changed += 1
        return changed

    bound = sum(1 for _ in _walk_strings(root)) + 1
    for _ in range(bound):
        if apply_round() == 0:
            break
    else:
        cycle = _find_placeholder_cycle(tree) \
            or _find_placeholder_cycle(ConfigTree(root))
        raise CycleError(
            "placeholder cycle: " + " -> ".join(cycle), cycle,
            origin=tree.source_file)

    for path, text in _walk_strings(root):
        if "{{" in text or "}}" in text:
            # A pure reference cycle reaches a fixpoint without ever
            # changing, so it shows up here rather than at the bound.
            cycle = _find_placeholder_cycle(tree) \
                or _find_placeholder_cycle(ConfigTree(root))
            if cycle:
                raise CycleError(
                    "placeholder cycle: " + " -> ".join(cycle), cycle,
                    origin=tree.source_file)
            raise ConfigError(
                f"malformed placeholder in {text!r}",
                key_path=path, origin=tree.origin(path))
    return ConfigTree(root=root, origins=dict(tree.origins),
                      source_file=tree.source_file)


def _set_path(root: dict, path: str, value: Any) -> None:
    parts = path.split("/")
    node: Any = root
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def process_project(path: str | Path) -> ConfigTree:
    """Full three-step load: read, merge imports, resolve placeholders."""
    path = Path(path)
    tree = load_project(path)
    tree = resolve_imports(tree, path.parent)
    return resolve_placeholders(tree)


def render_effective_config(node: Any, indent: int = 0) -> str:
    """Deterministic textual dump: sorted keys, double-quoted strings.

    Two semantically equal trees render byte-identically regardless of key
    insertion order.
    """
    if isinstance(node, ConfigTree):
        node = node.root
    lines = _render_lines(node, indent)
    return "\n".join(lines) + "\n"


def _render_scalar(value: Scalar) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    return repr(value)


def _render_lines(node: Any, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(node, dict):
        if not node:
            return [pad + "{}"]
        lines = []
        for key in sorted(node):
            value = node[key]
            if isinstance(value, dict) and value:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_lines(value, indent + 1))
            elif isinstance(value, list) and value:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_lines(value, indent + 1))
            elif isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}: " + ("{}" if isinstance(value, dict) else "[]"))
            else:
                lines.append(f"{pad}{key}: {_render_scalar(value)}")
        return lines
    if isinstance(node, list):
        lines = []
        for value in node:
            if isinstance(value, (dict, list)) and value:
                sub = _render_lines(value, indent + 1)
                lines.append(f"{pad}- " + sub[0].lstrip())
                lines.extend(sub[1:])
            elif isinstance(value, (dict, list)):
                lines.append(f"{pad}- " + ("{}" if isinstance(value, dict) else "[]"))
            else:
                lines.append(f"{pad}- {_render_scalar(value)}")
        return lines
    return [pad + _render_scalar(node)]
