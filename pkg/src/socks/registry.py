"""Builder registry: maps builder names to descriptors and factories.

Builders are selected purely by name from the project configuration; the
registry is populated at startup and read-only afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import BuilderError
from .validation import BlockProjectModel

VERB_RE = re.compile(r"^[a-z][a-z0-9]*(-[a-z0-9]+)*$")
CATEGORIES = ("building", "configuring", "debugging", "cleaning")


@dataclass(frozen=True)
class CommandDescriptor:
    verb: str
    category: str
    help: str

    def __post_init__(self):
        if not VERB_RE.match(self.verb):
            raise ValueError(f"invalid command verb: {self.verb!r}")
        if self.category not in CATEGORIES:
            raise ValueError(f"invalid command category: {self.category!r}")


@dataclass(frozen=True)
class BuilderDescriptor:
    name: str
    description: str
    schema: type[BlockProjectModel]
    commands: tuple[CommandDescriptor, ...]
    shares_container_group: str | None = None

    def __post_init__(self):
        if not self.commands:
            raise ValueError(f"builder {self.name} declares no commands")
        verbs = [c.verb for c in self.commands]
        if len(set(verbs)) != len(verbs):
            raise ValueError(f"builder {self.name} has duplicate verbs")

    def verbs(self) -> list[str]:
        return [c.verb for c in self.commands]

    def command(self, verb: str) -> CommandDescriptor | None:
        for cmd in self.commands:
            if cmd.verb == verb:
                return cmd
        return None


_REGISTRY: dict[str, tuple[BuilderDescriptor, Callable]] = {}


def register_builder(descriptor: BuilderDescriptor, factory: Callable) -> None:
    if descriptor.name in _REGISTRY:
        raise BuilderError(f"builder '{descriptor.name}' is already registered")
    _REGISTRY[descriptor.name] = (descriptor, factory)


def unregister_builder(name: str) -> None:
    _REGISTRY.pop(name, None)


def registered_names() -> list[str]:
    return sorted(_REGISTRY)


def get_descriptor(name: str) -> BuilderDescriptor:
    if name not in _REGISTRY:
        known = ", ".join(registered_names()) or "(none)"
        raise BuilderError(f"unknown builder '{name}' (available: {known})")
    return _REGISTRY[name][0]


def instantiate(name: str, block_id: str, spec, general, context):
    """Create a builder bound to its block; performs no filesystem writes."""
    descriptor = get_descriptor(name)
    factory = _REGISTRY[name][1]
    return factory(descriptor=descriptor, block_id=block_id, spec=spec,
                   general=general, context=context)


def generate_command_set(builder) -> list[CommandDescriptor]:
    return list(builder.descriptor.commands)
