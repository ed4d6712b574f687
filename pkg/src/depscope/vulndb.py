"""Debian-security-tracker client: fetch, cache, parse, aggregate.

The tracker publishes one large JSON document mapping source packages to
their tracked vulnerabilities:

    {"<source-package>": {"CVE-2014-0160": {
         "description": "...",
         "releases": {"bookworm": {"status": "resolved",
                                   "fixed_version": "1.0-2",
                                   "urgency": "medium"}, ...}}, ...}, ...}

Identifiers that do not look like CVE ids (the tracker also carries
temporary ``TEMP-`` entries) are parsed and retained but flagged, and are
excluded from every count.

Package aggregation happens against one release.  The tracker keys
releases by codename, so suite names like "stable" are resolved through a
shipped alias table ordered for reproducibility against archived
snapshots from the era this table was written in.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

import requests
from filelock import FileLock

from .errors import FetchError, ParseError, ValidationError

log = logging.getLogger(__name__)

DEFAULT_TRACKER_URL = "https://security-tracker.debian.org/tracker/data/json"

CVE_ID_RE = re.compile(r"^CVE-(\d{4})-(\d{4,})$")

STATUS_OPEN = "open"
STATUS_RESOLVED = "resolved"
STATUS_UNDETERMINED = "undetermined"
VALID_STATUSES = frozenset({STATUS_OPEN, STATUS_RESOLVED, STATUS_UNDETERMINED})

# Suite name -> codenames to try, archived-snapshot era first.  Edit when a
# new release cycle shifts the suites.
RELEASE_ALIASES: dict[str, tuple[str, ...]] = {
    "oldoldstable": ("buster", "bullseye"),
    "oldstable": ("bullseye", "bookworm"),
    "stable": ("bookworm", "trixie"),
    "testing": ("trixie", "forky"),
    "unstable": ("sid",),
}


@dataclass(frozen=True)
class ReleaseStatus:
    status: str
    fixed_version: str | None = None
    urgency: str | None = None


@dataclass(frozen=True)
class CveRecord:
    """One tracked vulnerability of one source package."""

    cve_id: str
    description: str = ""
    release_statuses: Mapping[str, ReleaseStatus] = field(default_factory=dict)
    is_cve: bool = True


@dataclass(frozen=True)
class PackageVulnStats:
    """Aggregated CVE counts of one source package for a selected release."""

    source_package: str
    total_entries: int
    open_count: int
    resolved_count: int


def is_cve_id(identifier: str) -> bool:
    """True for ``CVE-<year>-<number>`` with year >= 1999."""
    m = CVE_ID_RE.match(identifier)
    return bool(m) and int(m.group(1)) >= 1999


def parse_tracker_document(document: str | bytes | Mapping[str, Any]) -> dict[str, list[CveRecord]]:
    """Parse the tracker JSON into per-package record lists.

    Unknown fields are ignored; statuses outside the known set map to
    "undetermined" with a warning; non-CVE identifiers are retained with
    ``is_cve=False``.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed tracker document: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    else:
        data = document
    if not isinstance(data, Mapping):
        raise ValidationError("tracker document must be a JSON object keyed by package")

    result: dict[str, list[CveRecord]] = {}
    for package, entries in data.items():
        if not isinstance(entries, Mapping):
            raise ValidationError(f"package {package!r}: entries must be an object")
        records: list[CveRecord] = []
        for identifier, body in entries.items():
            if not isinstance(body, Mapping):
                raise ValidationError(f"package {package!r}, entry {identifier!r}: must be an object")
            releases_raw = body.get("releases", {})
            if not isinstance(releases_raw, Mapping):
                raise ValidationError(f"package {package!r}, entry {identifier!r}: 'releases' is not an object")
            releases: dict[str, ReleaseStatus] = {}
            for release, info in releases_raw.items():
                if not isinstance(info, Mapping):
                    raise ValidationError(
                        f"package {package!r}, entry {identifier!r}: release {release!r} is not an object"
                    )
                status = info.get("status", STATUS_UNDETERMINED)
                if status not in VALID_STATUSES:
                    log.warning(
                        "package %r, entry %r: unknown status %r mapped to undetermined",
                        package,
                        identifier,
                        status,
                    )
                    status = STATUS_UNDETERMINED
                fixed = info.get("fixed_version")
                urgency = info.get("urgency")
                releases[release] = ReleaseStatus(
                    status=status,
                    fixed_version=str(fixed) if fixed is not None else None,
                    urgency=str(urgency) if urgency is not None else None,
                )
            description = body.get("description", "")
            records.append(
                CveRecord(
                    cve_id=identifier,
                    description=description if isinstance(description, str) else "",
                    release_statuses=releases,
                    is_cve=is_cve_id(identifier),
                )
            )
        result[package] = records
    return result


def serialize_tracker(parsed: Mapping[str, list[CveRecord]]) -> dict[str, Any]:
    """Inverse of parse_tracker_document for the modeled fields."""
    out: dict[str, Any] = {}
    for package, records in parsed.items():
        entries: dict[str, Any] = {}
        for rec in records:
            releases: dict[str, Any] = {}
            for release, st in rec.release_statuses.items():
                info: dict[str, Any] = {"status": st.status}
                if st.fixed_version is not None:
                    info["fixed_version"] = st.fixed_version
                if st.urgency is not None:
                    info["urgency"] = st.urgency
                releases[release] = info
            entries[rec.cve_id] = {"description": rec.description, "releases": releases}
        out[package] = entries
    return out


def resolve_release(record: CveRecord, release: str) -> ReleaseStatus | None:
    """Status of ``record`` for ``release``, trying codename aliases in order."""
    candidates = (release,) + RELEASE_ALIASES.get(release, ())
    for name in candidates:
        status = record.release_statuses.get(name)
        if status is not None:
            return status
    return None


def summarize(records: list[CveRecord], release: str, source_package: str = "") -> PackageVulnStats:
    """Count open/resolved statuses for one release.

    Non-CVE entries never count.  CVE records lacking the release (or with
    an undetermined status) count toward the total only.
    """
    if not release:
        raise ValidationError("release name must be non-empty")
    total = 0
    open_count = 0
    resolved_count = 0
    for rec in records:
        if not rec.is_cve:
            continue
        total += 1
        status = resolve_release(rec, release)
        if status is None:
            continue
        if status.status == STATUS_OPEN:
            open_count += 1
        elif status.status == STATUS_RESOLVED:
            resolved_count += 1
    return PackageVulnStats(
        source_package=source_package,
        total_entries=total,
        open_count=open_count,
        resolved_count=resolved_count,
    )


# ---- fetch and cache ---------------------------------------------------------

CACHE_FILE = "tracker.json"
CACHE_META_FILE = "tracker.meta.json"
_LOCK_FILE = "tracker.lock"


@dataclass(frozen=True)
class CacheMeta:
    fetched_at: datetime
    url: str


def _default_http_get(url: str, timeout: float = 120.0) -> str:
    resp = requests.get(url, timeout=timeout)
    resp.raise_for_status()
    return resp.text


def cache_meta(cache_dir: str | Path) -> CacheMeta | None:
    """Provenance of the cached snapshot, or None when nothing is cached."""
    meta_path = Path(cache_dir) / CACHE_META_FILE
    if not meta_path.exists():
        return None
    try:
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
        return CacheMeta(fetched_at=datetime.fromisoformat(raw["fetched_at"]), url=raw["url"])
    except (json.JSONDecodeError, KeyError, ValueError):
        return None


def fetch_tracker(
    endpoint: str = DEFAULT_TRACKER_URL,
    cache_dir: str | Path = ".",
    max_age: timedelta = timedelta(days=1),
    *,
    offline: bool = False,
    lenient: bool = True,
    http_get: Callable[[str], str] | None = None,
    now: Callable[[], datetime] | None = None,
) -> dict[str, Any]:
    """Return the tracker document, via an on-disk cache.

    The cache lives at ``<cache_dir>/tracker.json`` with fetch provenance
    in ``tracker.meta.json``; replacement is atomic and guarded by an
    advisory lock so concurrent runs do not clobber each other.

    Fresh cache (younger than ``max_age``) short-circuits the network.
    Offline mode uses whatever cache exists, warning when it is stale.  A
    failed download falls back to a stale cache in lenient mode and raises
    FetchError otherwise, distinguishing "stale cache available" from "no
    cache at all".
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_path = cache_dir / CACHE_FILE
    meta_path = cache_dir / CACHE_META_FILE
    getter = http_get or _default_http_get
    clock = now or (lambda: datetime.now(timezone.utc))

    with FileLock(str(cache_dir / _LOCK_FILE)):
        meta = cache_meta(cache_dir)
        have_cache = cache_path.exists() and meta is not None
        age = (clock() - meta.fetched_at) if have_cache else None
        stale = age is not None and age > max_age

        if have_cache and not stale:
            return json.loads(cache_path.read_text(encoding="utf-8"))
        if offline:
            if have_cache:
                log.warning("offline mode: using cached tracker snapshot from %s (age %s)", meta.fetched_at, age)
                return json.loads(cache_path.read_text(encoding="utf-8"))
            raise FetchError("offline mode requested but no cached tracker snapshot exists")

        try:
            text = getter(endpoint)
            document = json.loads(text)
        except (requests.RequestException, OSError, json.JSONDecodeError) as exc:
            if have_cache:
                if lenient:
                    log.warning("tracker fetch failed (%s); falling back to stale cache from %s", exc, meta.fetched_at)
                    return json.loads(cache_path.read_text(encoding="utf-8"))
                raise FetchError(
                    f"tracker fetch failed and cache is stale: {exc}", stale_cache_available=True
                ) from exc
            raise FetchError(f"tracker fetch failed and no cache exists: {exc}") from exc

        fetched_at = clock()
        _atomic_write(cache_path, text)
        _atomic_write(
            meta_path,
            json.dumps({"fetched_at": fetched_at.isoformat(), "url": endpoint}, indent=2) + "\n",
        )
        return document


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
