"""Maintenance-health metrics mined from git histories.

All metrics derive from the commit stream of a repository plus an optional
worktree snapshot:

* project age: evaluation date minus the first commit timestamp,
* bus factor: smallest number of top authors whose cumulative commit
  share reaches a threshold (default 0.8),
* lines of code: newline counts over text files of the worktree,
* commit activity: counts per UTC calendar month or year, gap-filled.

Commit streams come either from a local clone (read by invoking the system
git tool) or from an interchange file with one record per line:

    <unix-timestamp>\\t<author-email>\\t<author-name>

Authors are merged by lowercased email, falling back to the lowercased
trimmed name when the email is empty; git's email is the nearest thing to
a stable identity across spellings of the same person.

Per-repository computations are independent and deterministic; run them
concurrently across repositories if you like.
"""

from __future__ import annotations

import logging
import os
import shutil
import subprocess
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .errors import DomainError, MissingToolError, ParseError, ValidationError

log = logging.getLogger(__name__)

_GIT_LOG_FORMAT = "%at%x09%ae%x09%an"
_VCS_DIRS = {".git"}
_BINARY_SNIFF_BYTES = 8000


@dataclass(frozen=True)
class CommitRecord:
    author_name: str
    author_email: str
    timestamp: datetime  # tz-aware UTC, seconds precision


@dataclass(frozen=True)
class RepoMetrics:
    """Per-repository maintenance signals at a fixed evaluation date."""

    repo_url: str
    age_days: int
    commit_count: int
    author_count: int
    bus_factor: int
    loc: int | None
    activity: tuple[tuple[str, int], ...]


def normalize_author(record: CommitRecord) -> str:
    email = record.author_email.strip().lower()
    return email if email else record.author_name.strip().lower()


def bus_factor(commits: list[CommitRecord], threshold: float = 0.8) -> int:
    """Smallest k such that the top-k authors own >= threshold of all commits."""
    if not commits:
        raise DomainError("bus factor of an empty history is undefined")
    if not 0 < threshold <= 1:
        raise DomainError("threshold must be in (0, 1]")
    counts = Counter(normalize_author(c) for c in commits)
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    total = len(commits)
    cumulative = 0
    for k, (_, count) in enumerate(ordered, start=1):
        cumulative += count
        if cumulative / total >= threshold:
            return k
    return len(ordered)  # unreachable for threshold <= 1, kept for safety


def project_age(commits: list[CommitRecord], as_of: datetime) -> timedelta:
    """Time from the first commit to the evaluation instant."""
    if not commits:
        raise DomainError("project age of an empty history is undefined")
    first = min(c.timestamp for c in commits)
    if as_of < first:
        raise DomainError(f"as_of {as_of.isoformat()} predates the first commit {first.isoformat()}")
    return as_of - first


def count_loc(worktree: str | Path) -> int:
    """Total line count over the text files of a worktree snapshot.

    Skips the version-control metadata directory and files with a NUL byte
    in their first 8000 bytes; tolerates stray non-UTF-8 bytes in
    otherwise-text files.
    """
    root = Path(worktree)
    if not root.is_dir():
        raise OSError(f"worktree {root} is not a readable directory")
    total = 0
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in _VCS_DIRS)
        for filename in sorted(filenames):
            path = Path(dirpath) / filename
            if not path.is_file() or path.is_symlink():
                continue
            data = path.read_bytes()
            if b"\x00" in data[:_BINARY_SNIFF_BYTES]:
                continue
            text = data.decode("utf-8", errors="replace")
            if text:
                total += text.count("\n") + (0 if text.endswith("\n") else 1)
    return total


def commit_activity(commits: list[CommitRecord], bucket: str = "month") -> list[tuple[str, int]]:
    """Commit counts per UTC calendar bucket, zero-filled between first and last."""
    if bucket not in ("month", "year"):
        raise DomainError(f"bucket must be 'month' or 'year', got {bucket!r}")
    if not commits:
        return []
    if bucket == "year":
        keys = [c.timestamp.year for c in commits]
        counts = Counter(keys)
        return [(f"{y:04d}", counts.get(y, 0)) for y in range(min(keys), max(keys) + 1)]
    keys = [(c.timestamp.year, c.timestamp.month) for c in commits]
    counts = Counter(keys)
    series = []
    year, month = min(keys)
    last = max(keys)
    while (year, month) <= last:
        series.append((f"{year:04d}-{month:02d}", counts.get((year, month), 0)))
        month += 1
        if month > 12:
            month = 1
            year += 1
    return series


def parse_interchange(text: str, source: str = "<interchange>") -> list[CommitRecord]:
    """Parse tab-separated commit records, one per line."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise ParseError(f"{source}: expected 3 tab-separated fields", line=lineno)
        raw_ts, email, name = parts
        try:
            ts = int(raw_ts)
        except ValueError:
            raise ParseError(f"{source}: bad timestamp {raw_ts!r}", line=lineno) from None
        if ts < 0:
            raise ParseError(f"{source}: timestamp before 1970", line=lineno)
        records.append(
            CommitRecord(
                author_name=name,
                author_email=email,
                timestamp=datetime.fromtimestamp(ts, tz=timezone.utc),
            )
        )
    return records


def read_commit_stream(source: str | Path) -> list[CommitRecord]:
    """Read the full commit history from a clone or an interchange file.

    A directory is read with the system git tool (all commits reachable
    from the default branch head); anything else is treated as an
    interchange file.  An empty repository yields an empty list.
    """
    path = Path(source)
    if path.is_dir():
        return _read_git_log(path)
    return parse_interchange(path.read_text(encoding="utf-8"), source=str(path))


def _read_git_log(repo_dir: Path) -> list[CommitRecord]:
    git = shutil.which("git")
    if git is None:
        raise MissingToolError("the git executable is required to read a repository directory")
    proc = subprocess.run(
        [git, "-C", str(repo_dir), "log", f"--format={_GIT_LOG_FORMAT}"],
        capture_output=True,
    )
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace").strip()
        if "does not have any commits" in stderr or "bad default revision" in stderr:
            return []
        raise ValidationError(f"git log failed for {repo_dir}: {stderr}")
    return parse_interchange(proc.stdout.decode("utf-8", errors="replace"), source=str(repo_dir))


def collect_repo_metrics(
    repo_url: str,
    commits: list[CommitRecord],
    as_of: datetime,
    worktree: str | Path | None = None,
    bucket: str = "month",
) -> RepoMetrics:
    """Assemble RepoMetrics from a commit stream and an optional worktree.

    ``loc`` is None when no worktree snapshot is available (interchange
    sources carry no file tree).  Raises DomainError for empty histories;
    callers report those repositories as absent rather than zeroed.
    """
    if not commits:
        raise DomainError(f"{repo_url}: empty history, metrics are reported as absent")
    future_cutoff = as_of + timedelta(days=1)
    future = sum(1 for c in commits if c.timestamp > future_cutoff)
    if future:
        log.warning("%s: %d commit(s) timestamped more than a day past the evaluation date", repo_url, future)
    age = project_age(commits, as_of)
    activity = tuple(commit_activity(commits, bucket))
    return RepoMetrics(
        repo_url=repo_url,
        age_days=age // timedelta(days=1),
        commit_count=len(commits),
        author_count=len({normalize_author(c) for c in commits}),
        bus_factor=bus_factor(commits),
        loc=count_loc(worktree) if worktree is not None else None,
        activity=activity,
    )
