"""Curated metadata and the joined analysis table.

Automation cannot reliably infer repository locations, implementation
languages, categories, backers, or cross-distribution name mappings, so
those fields live in a hand-maintained CSV that this module validates and
joins against the centrality ranking:

    package_id,repo_url,language,category,backer,debian_source,excluded,exclusion_reason

The Debian mapping is deliberately data, not code, preserving the audit
trail of a manual process known to have human-error, missing-package and
package-split caveats.  Missing joins degrade to absent fields; packages
without a Debian source are tallied in a missing-in-Debian report rather
than failing the pipeline.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .centrality import RankedPackage
from .depgraph import DependencyGraph
from .errors import DomainError, ValidationError
from .gitmetrics import RepoMetrics
from .vulndb import PackageVulnStats

log = logging.getLogger(__name__)

CURATED_COLUMNS = (
    "package_id",
    "repo_url",
    "language",
    "category",
    "backer",
    "debian_source",
    "excluded",
    "exclusion_reason",
)

BACKER_VALUES = frozenset({"single person", "NPO", "company", "multi", "unknown"})
EXCLUSION_REASONS = frozenset({"duplicate-version", "docs-only", "legacy-vcs", "other"})

_TRUE_WORDS = frozenset({"true", "1", "yes"})
_FALSE_WORDS = frozenset({"false", "0", "no", ""})


@dataclass(frozen=True)
class CuratedRecord:
    """Manually verified metadata for one ranked package."""

    package_id: str
    repo_url: str | None = None
    language: str | None = None
    category: str | None = None
    backer: str | None = None
    debian_source: str | None = None
    excluded: bool = False
    exclusion_reason: str | None = None


@dataclass(frozen=True)
class AnalysisRow:
    """One ranked, non-excluded package with everything joined in."""

    package_id: str
    rank: int
    katz_score: float
    metadata: CuratedRecord
    licenses: tuple[str, ...] = ()
    reverse_dep_count: int | None = None
    vuln: PackageVulnStats | None = None
    metrics: RepoMetrics | None = None


@dataclass
class TableBuild:
    """build_table output: the rows plus the join bookkeeping."""

    rows: list[AnalysisRow]
    missing_in_debian: list[str]
    unknown_curated: list[str]


def _parse_bool(raw: str, line: int) -> bool:
    word = raw.strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ValidationError(f"curated row at line {line}: 'excluded' must be a boolean, got {raw!r}")


def load_curated(source: str | Path) -> list[CuratedRecord]:
    """Load and validate the curated CSV (RFC 4180, UTF-8, declared header)."""
    if isinstance(source, Path) or "\n" not in str(source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValidationError("curated CSV is empty (no header)")
    if "package_id" not in reader.fieldnames:
        raise ValidationError("curated CSV header is missing 'package_id'")
    unknown = [c for c in reader.fieldnames if c not in CURATED_COLUMNS]
    if unknown:
        log.warning("curated CSV has unknown column(s) ignored: %s", ", ".join(unknown))

    records: list[CuratedRecord] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        package_id = (row.get("package_id") or "").strip()
        if not package_id:
            raise ValidationError(f"curated row at line {line} has no package_id")
        if package_id in seen:
            raise ValidationError(f"duplicate package_id {package_id!r} at line {line}")
        seen.add(package_id)

        def clean(column: str) -> str | None:
            value = (row.get(column) or "").strip()
            return value or None

        backer = clean("backer")
        if backer is not None and backer not in BACKER_VALUES:
            raise ValidationError(
                f"curated row at line {line}: backer {backer!r} not one of {sorted(BACKER_VALUES)}"
            )
        excluded = _parse_bool(row.get("excluded") or "", line)
        reason = clean("exclusion_reason")
        if reason is not None and reason not in EXCLUSION_REASONS:
            raise ValidationError(
                f"curated row at line {line}: exclusion_reason {reason!r} not one of {sorted(EXCLUSION_REASONS)}"
            )
        if excluded != (reason is not None):
            raise ValidationError(
                f"curated row at line {line}: excluded and exclusion_reason must be set together"
            )
        records.append(
            CuratedRecord(
                package_id=package_id,
                repo_url=clean("repo_url"),
                language=clean("language"),
                category=clean("category"),
                backer=backer,
                debian_source=clean("debian_source"),
                excluded=excluded,
                exclusion_reason=reason,
            )
        )
    return records


def curated_to_csv(records: list[CuratedRecord]) -> str:
    """Serialize curated records back to the canonical CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURATED_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                rec.package_id,
                rec.repo_url or "",
                rec.language or "",
                rec.category or "",
                rec.backer or "",
                rec.debian_source or "",
                "true" if rec.excluded else "false",
                rec.exclusion_reason or "",
            ]
        )
    return buf.getvalue()


def build_table(
    ranking: list[RankedPackage],
    curated: list[CuratedRecord],
    vuln_stats: Mapping[str, PackageVulnStats] | None = None,
    metrics: Mapping[str, RepoMetrics] | None = None,
    graph: DependencyGraph | None = None,
) -> TableBuild:
    """Left-join the ranking with curation, vuln stats and repo metrics.

    Excluded packages are dropped; everything else keeps its original
    centrality rank and order.  ``vuln_stats`` is keyed by Debian source
    package, ``metrics`` by package id.  When the graph is supplied, rows
    pick up license lists and reverse-dependency counts from the export.
    """
    if not ranking:
        raise DomainError("cannot build an analysis table from an empty ranking")
    vuln_stats = vuln_stats or {}
    metrics = metrics or {}
    by_id = {rec.package_id: rec for rec in curated}
    ranked_ids = {entry.id for entry in ranking}
    unknown_curated = [rec.package_id for rec in curated if rec.package_id not in ranked_ids]
    if unknown_curated:
        log.warning("curated record(s) not in the ranking: %s", ", ".join(unknown_curated))

    rows: list[AnalysisRow] = []
    missing_in_debian: list[str] = []
    for entry in ranking:
        meta = by_id.get(entry.id, CuratedRecord(package_id=entry.id))
        if meta.excluded:
            continue
        if meta.debian_source is None:
            missing_in_debian.append(entry.id)
            vuln = None
        else:
            vuln = vuln_stats.get(meta.debian_source)
        row_metrics = metrics.get(entry.id) if meta.repo_url else None
        licenses: tuple[str, ...] = ()
        reverse_deps: int | None = None
        if graph is not None and entry.id in graph:
            licenses = graph.nodes[entry.id].licenses
            reverse_deps = len(graph.reverse_dependencies(entry.id))
        rows.append(
            AnalysisRow(
                package_id=entry.id,
                rank=entry.rank,
                katz_score=entry.score,
                metadata=meta,
                licenses=licenses,
                reverse_dep_count=reverse_deps,
                vuln=vuln,
                metrics=row_metrics,
            )
        )
    return TableBuild(rows=rows, missing_in_debian=missing_in_debian, unknown_curated=unknown_curated)
