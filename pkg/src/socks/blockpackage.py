"""Block packages: the only data channel between blocks.

A block package is a gzip-compressed tar named ``bp_<blockid>_<stamp>.tar.gz``
carrying one block's build artifacts.  Archives are canonicalized (sorted
members, zeroed timestamps and ownership) so identical content always yields
an identical digest, which the incremental layer uses to skip re-imports.
"""

from __future__ import annotations

import fnmatch
import glob as globlib
import gzip
import hashlib
import io
import re
import shutil
import tarfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlparse

from .errors import ContentRuleViolation, PackageError

PACKAGE_NAME_RE = re.compile(r"^bp_[a-z0-9_]+_[0-9TZ:-]+\.tar\.gz$")
STAMP_FORMAT = "%Y%m%dT%H%M%SZ"


@dataclass(frozen=True)
class BlockPackage:
    path: Path
    emitter: str
    entries: tuple[str, ...]
    digest: str


@dataclass(frozen=True)
class ContentRule:
    """Required/optional glob manifest a consumer enforces on a package."""

    emitter: str
    required_globs: tuple[str, ...] = ()
    optional_globs: tuple[str, ...] = ()


@dataclass(frozen=True)
class DependencyRef:
    raw: str

    @property
    def kind(self) -> str:
        return "url" if urlparse(self.raw).scheme in ("http", "https", "file") \
            else "local-glob"


def make_stamp(now: datetime | None = None) -> str:
    now = now or datetime.now(timezone.utc)
    return now.strftime(STAMP_FORMAT)


def archive_digest(path: str | Path) -> str:
    """SHA-256 over the compressed archive bytes."""
    sha = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            sha.update(chunk)
    return sha.hexdigest()


def _check_member_path(name: str) -> None:
    if name.startswith("/") or name.startswith("\\"):
        raise PackageError(f"absolute member path not allowed: {name}")
    parts = Path(name).parts
    if ".." in parts:
        raise PackageError(f"path escape in archive member: {name}")


def create_package(block_id: str, output_dir: str | Path,
                   files: dict[str, Path] | list[tuple[str, Path]],
                   stamp: str | None = None) -> BlockPackage:
    """Write a canonical package of ``files`` (archive name -> source path).

    Identical content produces an identical digest regardless of when or in
    which order the files were staged.
    """
    items = sorted(dict(files).items())
    if not items:
        raise PackageError(f"block '{block_id}' produced no artifacts; "
                           "a package must carry at least one file")
    for name, _ in items:
        _check_member_path(name)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    stamp = stamp or make_stamp()
    archive_path = output_dir / f"bp_{block_id}_{stamp}.tar.gz"

    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w") as tar:
        for name, src in items:
            src = Path(src)
            if not src.is_file():
                raise PackageError(
                    f"artifact missing while packaging block '{block_id}': {src}")
            info = tarfile.TarInfo(name=name)
            data = src.read_bytes()
            info.size = len(data)
            info.mtime = 0
            info.uid = info.gid = 0
            info.uname = info.gname = ""
            info.mode = 0o755 if src.stat().st_mode & 0o111 else 0o644
            tar.addfile(info, io.BytesIO(data))
    raw = buf.getvalue()
    with open(archive_path, "wb") as fh:
        # filename="" keeps the stamped file name out of the gzip header,
        # otherwise identical content would hash differently per build.
        with gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(raw)

    return BlockPackage(
        path=archive_path,
        emitter=block_id,
        entries=tuple(name for name, _ in items),
        digest=archive_digest(archive_path),
    )


def open_package(path: str | Path, emitter: str = "") -> BlockPackage:
    path = Path(path)
    try:
        with tarfile.open(path, "r:gz") as tar:
            entries = tuple(m.name for m in tar.getmembers() if m.isfile())
    except (tarfile.TarError, OSError, EOFError) as exc:
        raise PackageError(f"corrupt or unreadable block package {path}: {exc}") \
            from exc
    if not emitter:
        match = re.match(r"^bp_([a-z0-9_]+)_", path.name)
        emitter = match.group(1) if match else ""
    return BlockPackage(path=path, emitter=emitter, entries=entries,
                        digest=archive_digest(path))


def _stamp_key(path: Path) -> str:
    return path.name


def resolve_dependency(ref: DependencyRef, project_dir: str | Path,
                       download_dir: str | Path | None = None,
                       credentials: dict | None = None) -> Path:
    """Turn a dependency reference into a local archive path.

    Local globs resolve relative to the project folder; when several stamps
    match, the lexicographically greatest (newest) wins.  URLs are fetched
    with a single GET into ``download_dir``.
    """
    project_dir = Path(project_dir)
    if ref.kind == "url":
        return _download(ref.raw, Path(download_dir or project_dir), credentials)
    matches = [Path(p) for p in globlib.glob(str(project_dir / ref.raw))]
    matches = [p for p in matches if p.is_file()]
    if not matches:
        raise PackageError(
            f"no block package matches '{ref.raw}'; "
            f"build the providing block first or import it")
    return max(matches, key=_stamp_key)


def _download(url: str, dest_dir: Path, credentials: dict | None) -> Path:
    parsed = urlparse(url)
    dest_dir.mkdir(parents=True, exist_ok=True)
    name = Path(parsed.path).name or "download.tar.gz"
    dest = dest_dir / name
    request = urllib.request.Request(url)
    if credentials and parsed.scheme in ("http", "https"):
        creds = credentials.get(parsed.hostname or "", {})
        if "username" in creds:
            import base64
            token = base64.b64encode(
                f"{creds['username']}:{creds.get('password', '')}".encode()
            ).decode("ascii")
            request.add_header("Authorization", f"Basic {token}")
    try:
        with urllib.request.urlopen(request) as resp, open(dest, "wb") as out:
            shutil.copyfileobj(resp, out)
    except urllib.error.URLError as exc:
        raise PackageError(f"download failed for {url}: {exc}") from exc
    return dest


def validate_contents(pkg: BlockPackage, rule: ContentRule) -> list[str]:
    """Return the unmatched required globs (empty list means the rule holds).

    Optional globs never cause a failure; they only document what a consumer
    will pick up when present.
    """
    violations = []
    for pattern in rule.required_globs:
        if not any(fnmatch.fnmatch(entry, pattern) or
                   fnmatch.fnmatch(Path(entry).name, pattern)
                   for entry in pkg.entries):
            violations.append(pattern)
    return violations


def require_contents(pkg: BlockPackage, rule: ContentRule) -> None:
    violations = validate_contents(pkg, rule)
    if violations:
        raise ContentRuleViolation(
            f"block package from '{rule.emitter}' ({pkg.path.name}) is missing "
            f"required entries: {violations}", violations)


def import_package(pkg: BlockPackage, dest_dir: str | Path,
                   checksum_store=None) -> dict:
    """Extract a package, once per digest.

    When ``checksum_store`` already knows the digest the extraction is
    skipped and the filesystem stays untouched.
    """
    dest_dir = Path(dest_dir)
    if checksum_store is not None and checksum_store.seen(pkg.digest):
        return {"imported": False, "digest": pkg.digest}
    try:
        with tarfile.open(pkg.path, "r:gz") as tar:
            for member in tar.getmembers():
                _check_member_path(member.name)
                if member.islnk() or member.issym():
                    raise PackageError(
                        f"links not allowed in block packages: {member.name}")
            dest_dir.mkdir(parents=True, exist_ok=True)
            tar.extractall(dest_dir)
    except (tarfile.TarError, OSError, EOFError) as exc:
        if isinstance(exc, PackageError):
            raise
        raise PackageError(f"extraction failed for {pkg.path}: {exc}") from exc
    if checksum_store is not None:
        checksum_store.record(pkg.digest)
    return {"imported": True, "digest": pkg.digest}
