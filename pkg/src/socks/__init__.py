"""socks: a modular build orchestrator for multi-component bootable
SoC images.

An image is partitioned into blocks, each built by a pluggable builder in a
reproducible environment; blocks exchange data exclusively through block
packages, and an incremental layer skips work whose inputs did not change.
"""

__version__ = "0.1.0"

from .errors import SocksError  # noqa: F401
from .project import Project  # noqa: F401
