"""Machine-readable evaluation reports.

A report bundles the ranked table, the open-issues-by-centrality listing,
box summaries per numeric metric, categorical breakdowns and the
CVE-vs-LoC regression, together with full provenance (centrality
parameters, vulnerability snapshot timestamp and source URL, tool
version).  Emission is deterministic: identical inputs give byte-identical
artifacts, and the JSON form round-trips through parse and re-emit
unchanged.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .centrality import CentralityParams
from .dataset import AnalysisRow, TableBuild
from .errors import DomainError, ValidationError
from .stats import BoxStats, box_stats, breakdown, linear_regression

REPORT_SCHEMA = "depscope/report/v1"
BUNDLE_SCHEMA = "depscope/report-bundle/v1"

# AnalysisRow accessors for the metrics that get a box summary.
_BOX_METRICS = (
    ("age_days", lambda row: row.metrics.age_days if row.metrics else None),
    ("loc", lambda row: row.metrics.loc if row.metrics else None),
    ("bus_factor", lambda row: row.metrics.bus_factor if row.metrics else None),
    ("commit_count", lambda row: row.metrics.commit_count if row.metrics else None),
    ("reverse_dependencies", lambda row: row.reverse_dep_count),
    ("cve_total", lambda row: row.vuln.total_entries if row.vuln else None),
    ("cve_open", lambda row: row.vuln.open_count if row.vuln else None),
)


@dataclass(frozen=True)
class SnapshotMeta:
    """Which vulnerability-database snapshot fed the report."""

    fetched_at: str  # ISO 8601
    url: str


@dataclass
class Report:
    generated_at: datetime
    graph_summary: dict[str, int]
    params: CentralityParams
    snapshot_meta: SnapshotMeta | None
    tables: dict[str, Any]
    notes: list[str]
    tool_version: str = __version__


def open_issues_by_centrality(rows: Sequence[AnalysisRow]) -> list[tuple[str, int]]:
    """Packages with unpatched issues, in centrality-rank order."""
    return [(row.package_id, row.vuln.open_count) for row in rows if row.vuln and row.vuln.open_count > 0]


def _box_to_dict(stats: BoxStats) -> dict[str, Any]:
    return {
        "q1": stats.q1,
        "median": stats.median,
        "q3": stats.q3,
        "iqr": stats.iqr,
        "whisker_low": stats.whisker_low,
        "whisker_high": stats.whisker_high,
        "fliers": list(stats.fliers),
        "n": stats.n,
    }


def build_report(
    table: TableBuild,
    *,
    generated_at: datetime,
    graph_summary: dict[str, int],
    params: CentralityParams,
    snapshot_meta: SnapshotMeta | None = None,
) -> Report:
    """Assemble every report section from the joined analysis table."""
    rows = table.rows
    notes: list[str] = []
    has_vuln = any(row.vuln is not None for row in rows)
    if has_vuln and snapshot_meta is None:
        raise ValidationError("rows carry vulnerability stats but no snapshot provenance was supplied")

    tables: dict[str, Any] = {
        "ranking": [
            {"package_id": row.package_id, "rank": row.rank, "score": row.katz_score} for row in rows
        ],
        "missing_in_debian": sorted(table.missing_in_debian),
    }

    if has_vuln:
        tables["open_issues"] = [
            {"package_id": pid, "open_count": count} for pid, count in open_issues_by_centrality(rows)
        ]
    else:
        notes.append("no vulnerability artifact supplied; open-issue and CVE sections omitted")

    box_sections: dict[str, Any] = {}
    for name, accessor in _BOX_METRICS:
        values = [accessor(row) for row in rows]
        values = [float(v) for v in values if v is not None]
        if values:
            box_sections[name] = _box_to_dict(box_stats(values))
    tables["box_stats"] = box_sections

    tables["breakdowns"] = {
        field: [{"label": e.label, "count": e.count, "share": e.share} for e in breakdown(rows, field)]
        for field in ("language", "license", "category", "backer")
    }

    points = [
        (float(row.metrics.loc), float(row.vuln.total_entries))
        for row in rows
        if row.metrics and row.metrics.loc is not None and row.vuln is not None
    ]
    try:
        fit = linear_regression(points)
        tables["regression"] = {
            "x_field": "loc",
            "y_field": "cve_total",
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r": fit.r,
            "n": fit.n,
        }
    except DomainError:
        notes.append("regression omitted: fewer than two packages carry both LoC and CVE totals")

    return Report(
        generated_at=generated_at,
        graph_summary=dict(graph_summary),
        params=params,
        snapshot_meta=snapshot_meta,
        tables=tables,
        notes=notes,
    )


def report_to_document(report: Report) -> dict[str, Any]:
    return {
        "schema": REPORT_SCHEMA,
        "generated_at": report.generated_at.isoformat(),
        "tool_version": report.tool_version,
        "graph_summary": report.graph_summary,
        "params": {
            "alpha": report.params.alpha,
            "beta": report.params.beta,
            "tolerance": report.params.tolerance,
            "max_iterations": report.params.max_iterations,
            "normalize": report.params.normalize,
        },
        "snapshot": (
            {"fetched_at": report.snapshot_meta.fetched_at, "url": report.snapshot_meta.url}
            if report.snapshot_meta
            else None
        ),
        "notes": list(report.notes),
        "tables": report.tables,
    }


def canonical_json(document: Any) -> str:
    """The one JSON serialization used everywhere, so equality means byte equality."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_report_json(report: Report) -> str:
    return canonical_json(report_to_document(report))


def _csv_text(header: list[str], data_rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in data_rows:
        writer.writerow(row)
    return buf.getvalue()


def _format_cell(value: Any) -> Any:
    # Shortest round-trip decimals for floats; everything else as-is.
    return repr(value) if isinstance(value, float) else value


def _bundle_tables(report: Report) -> dict[str, str]:
    """Flatten each report section into one CSV file."""
    files: dict[str, str] = {}
    tables = report.tables

    ranking = tables.get("ranking", [])
    files["ranking.csv"] = _csv_text(
        ["package_id", "rank", "score"],
        [[r["package_id"], r["rank"], _format_cell(r["score"])] for r in ranking],
    )
    if "open_issues" in tables:
        files["open_issues.csv"] = _csv_text(
            ["package_id", "open_count"],
            [[r["package_id"], r["open_count"]] for r in tables["open_issues"]],
        )
    files["missing_in_debian.csv"] = _csv_text(
        ["package_id"], [[pid] for pid in tables.get("missing_in_debian", [])]
    )
    files["box_stats.csv"] = _csv_text(
        ["metric", "q1", "median", "q3", "iqr", "whisker_low", "whisker_high", "n", "fliers"],
        [
            [
                metric,
                _format_cell(b["q1"]),
                _format_cell(b["median"]),
                _format_cell(b["q3"]),
                _format_cell(b["iqr"]),
                _format_cell(b["whisker_low"]),
                _format_cell(b["whisker_high"]),
                b["n"],
                ";".join(repr(f) for f in b["fliers"]),
            ]
            for metric, b in sorted(tables.get("box_stats", {}).items())
        ],
    )
    files["breakdowns.csv"] = _csv_text(
        ["field", "label", "count", "share"],
        [
            [field, e["label"], e["count"], _format_cell(e["share"])]
            for field, entries in sorted(tables.get("breakdowns", {}).items())
            for e in entries
        ],
    )
    if "regression" in tables:
        reg = tables["regression"]
        files["regression.csv"] = _csv_text(
            ["x_field", "y_field", "slope", "intercept", "r", "n"],
            [
                [
                    reg["x_field"],
                    reg["y_field"],
                    _format_cell(reg["slope"]),
                    _format_cell(reg["intercept"]),
                    _format_cell(reg["r"]),
                    reg["n"],
                ]
            ],
        )
    return files


def emit_report_bundle(report: Report, out_dir: str | Path) -> list[Path]:
    """Write one CSV per table plus a manifest with content digests."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = _bundle_tables(report)
    written: list[Path] = []
    manifest_entries = []
    for name in sorted(files):
        text = files[name]
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
        manifest_entries.append(
            {
                "file": name,
                "rows": max(text.count("\n") - 1, 0),
                "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
            }
        )
    manifest = {
        "schema": BUNDLE_SCHEMA,
        "generated_at": report.generated_at.isoformat(),
        "tool_version": report.tool_version,
        "snapshot": (
            {"fetched_at": report.snapshot_meta.fetched_at, "url": report.snapshot_meta.url}
            if report.snapshot_meta
            else None
        ),
        "notes": list(report.notes),
        "files": manifest_entries,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(canonical_json(manifest), encoding="utf-8")
    written.append(manifest_path)
    return written
