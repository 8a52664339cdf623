"""Build environments: ephemeral containers or the plain host.

Host commands run through the POSIX shell (``sh``) and are restricted to the
small host tool set (git, core utilities, the container tool).  Build
commands run through ``bash`` -- inside the block's container when
containerization is enabled, directly on the host otherwise -- so command
semantics are identical in both modes.

Every external invocation is logged and reported to registered observers,
which keeps container use visible to the user and lets tests assert exactly
which tools were spawned.
"""

from __future__ import annotations

import fcntl
import logging
import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import EnvironmentError_, ProcessError

log = logging.getLogger(__name__)

# Programs a builder may call directly on the host.
HOST_TOOLS = frozenset({
    "git", "docker", "podman",
    # GNU core utilities (the commonly needed subset)
    "basename", "cat", "chmod", "chown", "cp", "cut", "date", "df", "dirname",
    "du", "echo", "env", "false", "head", "hostname", "id", "ln", "ls",
    "mkdir", "mktemp", "mv", "printf", "pwd", "readlink", "rm", "rmdir",
    "sha256sum", "sleep", "sort", "stat", "tail", "test", "touch", "tr",
    "true", "uname", "uniq", "wc",
})

CONTAINER_MOUNT = "/socks/project"


@dataclass(frozen=True)
class ProcessResult:
    command: str
    returncode: int
    stdout: str
    stderr: str

    @property
    def ok(self) -> bool:
        return self.returncode == 0


_observers: list[Callable[[str, list[str]], None]] = []


def add_invocation_observer(fn: Callable[[str, list[str]], None]) -> None:
    _observers.append(fn)


def remove_invocation_observer(fn: Callable[[str, list[str]], None]) -> None:
    _observers.remove(fn)


def _notify(kind: str, argv: list[str]) -> None:
    for fn in list(_observers):
        fn(kind, argv)


def _run(argv: list[str], *, kind: str, cwd: str | Path | None = None,
         env: dict | None = None, check: bool = True,
         capture: bool = True) -> ProcessResult:
    log.info("exec [%s] %s", kind, shlex.join(argv))
    _notify(kind, argv)
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    proc = subprocess.run(
        argv, cwd=cwd, env=full_env,
        capture_output=capture, text=True)
    result = ProcessResult(command=shlex.join(argv),
                           returncode=proc.returncode,
                           stdout=proc.stdout if capture else "",
                           stderr=proc.stderr if capture else "")
    if check and result.returncode != 0:
        raise ProcessError(
            f"command failed with exit {result.returncode}: {result.command}",
            result=result)
    return result


def _first_program(cmd: str) -> str:
    try:
        tokens = shlex.split(cmd)
    except ValueError:
        return cmd.split()[0] if cmd.split() else ""
    return Path(tokens[0]).name if tokens else ""


def execute_host(cmd: str, *, cwd: str | Path | None = None,
                 env: dict | None = None, check: bool = True) -> ProcessResult:
    """Run a host command via ``sh -c``; only whitelisted tools allowed."""
    program = _first_program(cmd)
    if program not in HOST_TOOLS:
        raise EnvironmentError_(
            f"'{program}' is not in the host tool whitelist; "
            f"run it via the build environment instead")
    return _run(["sh", "-c", cmd], kind="host", cwd=cwd, env=env, check=check)


@dataclass(frozen=True)
class EnvSpec:
    image: str
    tag: str
    tool: str  # docker | podman
    mode: str  # container | host
    project_dir: Path

    @property
    def image_ref(self) -> str:
        return f"{self.image}:{self.tag}"


def make_env_spec(*, image: str, tag: str, container_tool: str,
                  project_dir: str | Path) -> EnvSpec:
    mode = "host" if container_tool == "disabled" else "container"
    return EnvSpec(image=image, tag=tag,
                   tool=container_tool if mode == "container" else "",
                   mode=mode, project_dir=Path(project_dir))


def bundled_containerfile(image: str) -> Path:
    path = Path(__file__).parent / "containerfiles" / f"{image}.Containerfile"
    if not path.exists():
        raise EnvironmentError_(
            f"no container definition bundled for image '{image}'")
    return path


class EnvironmentManager:
    """Image lifecycle plus command execution for one environment spec."""

    def __init__(self, spec: EnvSpec, max_threads: int = 1,
                 event_log=None):
        self.spec = spec
        self.max_threads = max_threads
        self.event_log = event_log

    def _image_exists(self) -> bool:
        result = _run([self.spec.tool, "image", "inspect", self.spec.image_ref],
                      kind="container-tool", check=False)
        return result.ok

    def ensure_image(self) -> dict:
        """Build the image from its bundled definition unless it already
        exists in the container tool's store (shared across projects)."""
        if self.spec.mode == "host":
            return {"built": False}
        containerfile = bundled_containerfile(self.spec.image)
        lock_dir = self.spec.project_dir / "temp" / ".locks"
        lock_dir.mkdir(parents=True, exist_ok=True)
        lock_path = lock_dir / f"image-{self.spec.image}.lock"
        with open(lock_path, "w") as lock_fh:
            fcntl.flock(lock_fh, fcntl.LOCK_EX)
            if self._image_exists():
                return {"built": False}
            log.info("building container image %s", self.spec.image_ref)
            _run([self.spec.tool, "build", "-t", self.spec.image_ref,
                  "-f", str(containerfile), str(containerfile.parent)],
                 kind="container-tool")
            if self.event_log is not None:
                self.event_log.record(f"image-{self.spec.image}")
        return {"built": True}

    def _container_path(self, host_path: Path) -> str:
        rel = Path(host_path).resolve().relative_to(
            self.spec.project_dir.resolve())
        return f"{CONTAINER_MOUNT}/{rel.as_posix()}"

    def run(self, cmd: str, *, workdir: str | Path,
            env: dict | None = None, check: bool = True) -> ProcessResult:
        """Run a build command via bash, in the container or on the host."""
        extra = {"SOCKS_MAX_THREADS": str(self.max_threads)}
        extra.update(env or {})
        if self.spec.mode == "host":
            Path(workdir).mkdir(parents=True, exist_ok=True)
            return _run(["bash", "-c", cmd], kind="build",
                        cwd=workdir, env=extra, check=check)
        argv = [self.spec.tool, "run", "--rm",
                "-u", f"{os.getuid()}:{os.getgid()}",
                "-v", f"{self.spec.project_dir.resolve()}:{CONTAINER_MOUNT}",
                "-w", self._container_path(Path(workdir))]
        for key, value in extra.items():
            argv += ["-e", f"{key}={value}"]
        argv += [self.spec.image_ref, "bash", "-c", cmd]
        log.info("container start: %s", self.spec.image_ref)
        try:
            return _run(argv, kind="container-tool", check=check)
        finally:
            log.info("container stopped: %s", self.spec.image_ref)

    def translate_path(self, host_path: Path) -> str:
        """Path as seen by build commands (container mount or host path)."""
        if self.spec.mode == "host":
            return str(Path(host_path))
        return self._container_path(host_path)

    def interactive_session(self, workdir: str | Path) -> int:
        if self.spec.mode == "host":
            raise EnvironmentError_(
                "start-container requires containerization; "
                "container_tool is 'disabled'")
        if not sys.stdin.isatty():
            raise EnvironmentError_(
                "start-container needs an attached terminal")
        self.ensure_image()
        argv = [self.spec.tool, "run", "--rm", "-it",
                "-u", f"{os.getuid()}:{os.getgid()}",
                "-v", f"{self.spec.project_dir.resolve()}:{CONTAINER_MOUNT}",
                "-w", self._container_path(Path(workdir)),
                self.spec.image_ref, "bash"]
        log.info("interactive container session: %s", self.spec.image_ref)
        _notify("container-tool", argv)
        return subprocess.call(argv)
