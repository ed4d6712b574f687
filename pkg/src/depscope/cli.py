"""Command line interface.

Pipeline stages communicate through files so every intermediate stays
auditable:

    depscope rank     graph export        -> ranking artifact (json/csv)
    depscope vuln     curated + tracker   -> per-package CVE stats artifact
    depscope metrics  curated + repos dir -> per-package repo metrics artifact
    depscope report   all of the above    -> final report (json or csv bundle)
    depscope graph inspect                -> ad-hoc graph queries

Exit codes: 0 success, 2 parse/validation, 3 network, 4 divergence,
5 I/O or missing tool.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any

from . import __version__, vulndb
from .centrality import (
    CentralityParams,
    RankedPackage,
    katz_centrality,
    rank,
    ranking_to_csv,
    ranking_to_document,
)
from .dataset import CuratedRecord, build_table, load_curated
from .depgraph import load_graph_file, to_document
from .errors import DepscopeError, DivergenceError, ParseError, ValidationError
from .gitmetrics import RepoMetrics, collect_repo_metrics, read_commit_stream
from .report import SnapshotMeta, build_report, canonical_json, emit_report_bundle, emit_report_json
from .vulndb import PackageVulnStats, cache_meta, fetch_tracker, parse_tracker_document, summarize

log = logging.getLogger(__name__)

BASELINE_AS_OF = datetime(2024, 3, 18, tzinfo=timezone.utc)

RANKING_SCHEMA = "depscope/ranking/v1"
VULN_SCHEMA = "depscope/vuln/v1"
METRICS_SCHEMA = "depscope/metrics/v1"


@dataclass
class PipelineConfig:
    graph_path: Path | None = None
    curated_path: Path | None = None
    tracker_endpoint: str = vulndb.DEFAULT_TRACKER_URL
    cache_dir: Path = field(default_factory=lambda: _default_cache_dir())
    release: str = "stable"
    top_k: int = 200
    as_of: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    centrality: CentralityParams = field(default_factory=CentralityParams)
    strict: bool = False
    offline: bool = False
    max_age: timedelta = timedelta(days=1)
    fmt: str = "json"
    output: Path | None = None


def _default_cache_dir() -> Path:
    env = os.environ.get("DEPSCOPE_CACHE_DIR")
    if env:
        return Path(env)
    base = Path(os.environ.get("XDG_CACHE_HOME", "~/.cache")).expanduser()
    return base / "depscope"


def _parse_as_of(value: str) -> datetime:
    try:
        return datetime.strptime(value, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {value!r}")


def _write_output(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")


def _check_schema(doc: Any, expected: str, path: Path) -> None:
    found = doc.get("schema") if isinstance(doc, dict) else None
    if found != expected:
        raise ValidationError(f"{path}: artifact schema mismatch, expected {expected!r}, found {found!r}")


def _load_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


# ---- rank ---------------------------------------------------------------------


def cmd_rank(config: PipelineConfig) -> int:
    graph = load_graph_file(config.graph_path, strict=config.strict)
    if graph.ingest.duplicate_edges or graph.ingest.dropped_dangling or graph.ingest.ignored_edge_labels:
        print(
            f"ingest: collapsed {graph.ingest.duplicate_edges} duplicate edge(s), "
            f"dropped {graph.ingest.dropped_dangling} dangling, "
            f"ignored {graph.ingest.ignored_edge_labels} foreign label(s)",
            file=sys.stderr,
        )
    scores = katz_centrality(graph, config.centrality)
    print(
        f"katz centrality converged after {scores.iterations} iteration(s) "
        f"on {graph.node_count} nodes / {graph.edge_count} edges",
        file=sys.stderr,
    )
    ranking = rank(scores, config.top_k)
    if config.fmt == "csv":
        _write_output(ranking_to_csv(ranking), config.output)
    else:
        _write_output(canonical_json(ranking_to_document(scores, ranking, graph)), config.output)
    return 0


# ---- vuln ---------------------------------------------------------------------


def cmd_vuln(config: PipelineConfig) -> int:
    curated = load_curated(config.curated_path)
    active = [rec for rec in curated if not rec.excluded]
    mapped = [rec for rec in active if rec.debian_source]
    unmapped = sorted(rec.package_id for rec in active if not rec.debian_source)
    if unmapped:
        if config.strict:
            raise ValidationError(
                f"{len(unmapped)} package(s) have no Debian source mapping: {', '.join(unmapped)}"
            )
        log.warning("%d package(s) have no Debian source mapping: %s", len(unmapped), ", ".join(unmapped))

    document = fetch_tracker(
        config.tracker_endpoint,
        config.cache_dir,
        config.max_age,
        offline=config.offline,
        lenient=not config.strict,
    )
    parsed = parse_tracker_document(document)
    meta = cache_meta(config.cache_dir)
    if meta is None:
        raise ValidationError(f"cache at {config.cache_dir} has no snapshot metadata; refetch the tracker")

    stats: dict[str, Any] = {}
    for rec in mapped:
        summary = summarize(parsed.get(rec.debian_source, []), config.release, rec.debian_source)
        stats[rec.debian_source] = {
            "total_entries": summary.total_entries,
            "open_count": summary.open_count,
            "resolved_count": summary.resolved_count,
        }

    artifact = {
        "schema": VULN_SCHEMA,
        "release": config.release,
        "snapshot": {"fetched_at": meta.fetched_at.isoformat(), "url": meta.url},
        "stats": stats,
        "unmapped": unmapped,
    }
    _write_output(canonical_json(artifact), config.output)
    return 0


# ---- metrics ------------------------------------------------------------------


def repo_slug(repo_url: str) -> str:
    """Directory/file stem a repository is expected under in the repos dir."""
    tail = repo_url.rstrip("/").rsplit("/", 1)[-1]
    return tail[:-4] if tail.endswith(".git") else tail


def _metrics_sources(repos_dir: Path, rec: CuratedRecord) -> tuple[Path, Path | None] | None:
    """Locate the commit source and worktree for one curated record.

    Returns (commit source, worktree or None): a git clone serves as both;
    an interchange file may sit next to a plain worktree directory.
    """
    slug = repo_slug(rec.repo_url)
    clone = repos_dir / slug
    interchange = repos_dir / f"{slug}.commits.tsv"
    if interchange.is_file():
        worktree = clone if clone.is_dir() else None
        return interchange, worktree
    if clone.is_dir() and (clone / ".git").exists():
        return clone, clone
    return None


def _one_repo_metrics(rec: CuratedRecord, sources: tuple[Path, Path | None], config: PipelineConfig, bucket: str):
    commit_source, worktree = sources
    commits = read_commit_stream(commit_source)
    if not commits:
        raise DepscopeError(f"{rec.package_id}: repository history is empty")
    return collect_repo_metrics(rec.repo_url, commits, config.as_of, worktree=worktree, bucket=bucket)


def cmd_metrics(config: PipelineConfig, repos_dir: Path, bucket: str = "month") -> int:
    curated = load_curated(config.curated_path)
    active = [rec for rec in curated if not rec.excluded]
    with_repo = [rec for rec in active if rec.repo_url]
    skipped = sorted(rec.package_id for rec in active if not rec.repo_url)

    missing: list[str] = []
    jobs: list[tuple[CuratedRecord, tuple[Path, Path | None]]] = []
    for rec in with_repo:
        sources = _metrics_sources(repos_dir, rec)
        if sources is None:
            missing.append(rec.package_id)
            log.warning("%s: no clone or interchange file under %s", rec.package_id, repos_dir)
        else:
            jobs.append((rec, sources))

    results: dict[str, RepoMetrics] = {}
    errors: dict[str, str] = {}

    def work(job):
        rec, sources = job
        try:
            return rec.package_id, _one_repo_metrics(rec, sources, config, bucket), None
        except (DepscopeError, OSError) as exc:
            return rec.package_id, None, str(exc)

    if jobs:
        with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
            for package_id, metrics, error in pool.map(work, jobs):
                if error is not None:
                    errors[package_id] = error
                    log.warning("%s: %s", package_id, error)
                else:
                    results[package_id] = metrics

    artifact = {
        "schema": METRICS_SCHEMA,
        "as_of": config.as_of.isoformat(),
        "bucket": bucket,
        "metrics": {
            pid: {
                "repo_url": m.repo_url,
                "age_days": m.age_days,
                "commit_count": m.commit_count,
                "author_count": m.author_count,
                "bus_factor": m.bus_factor,
                "loc": m.loc,
                "activity": [[label, count] for label, count in m.activity],
            }
            for pid, m in sorted(results.items())
        },
        "missing": sorted(missing),
        "errors": {pid: errors[pid] for pid in sorted(errors)},
        "skipped_no_repo_url": skipped,
    }
    _write_output(canonical_json(artifact), config.output)
    return 0


# ---- report -------------------------------------------------------------------


def _read_ranking_artifact(path: Path) -> tuple[list[RankedPackage], CentralityParams]:
    doc = _load_json(path)
    _check_schema(doc, RANKING_SCHEMA, path)
    try:
        p = doc["params"]
        params = CentralityParams(
            alpha=p["alpha"],
            beta=p["beta"],
            tolerance=p["tolerance"],
            max_iterations=p["max_iterations"],
            normalize=p["normalize"],
        )
        ranking = [RankedPackage(r["id"], r["score"], r["rank"]) for r in doc["ranking"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed ranking artifact ({exc!r})") from exc
    return ranking, params


def _read_vuln_artifact(path: Path) -> tuple[dict[str, PackageVulnStats], SnapshotMeta]:
    doc = _load_json(path)
    _check_schema(doc, VULN_SCHEMA, path)
    try:
        stats = {
            source: PackageVulnStats(
                source_package=source,
                total_entries=entry["total_entries"],
                open_count=entry["open_count"],
                resolved_count=entry["resolved_count"],
            )
            for source, entry in doc["stats"].items()
        }
        snapshot = SnapshotMeta(fetched_at=doc["snapshot"]["fetched_at"], url=doc["snapshot"]["url"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed vuln artifact ({exc!r})") from exc
    return stats, snapshot


def _read_metrics_artifact(path: Path) -> dict[str, RepoMetrics]:
    doc = _load_json(path)
    _check_schema(doc, METRICS_SCHEMA, path)
    try:
        return {
            pid: RepoMetrics(
                repo_url=entry["repo_url"],
                age_days=entry["age_days"],
                commit_count=entry["commit_count"],
                author_count=entry["author_count"],
                bus_factor=entry["bus_factor"],
                loc=entry["loc"],
                activity=tuple((label, count) for label, count in entry["activity"]),
            )
            for pid, entry in doc["metrics"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed metrics artifact ({exc!r})") from exc


def cmd_report(
    config: PipelineConfig,
    ranking_path: Path,
    vuln_path: Path | None = None,
    metrics_path: Path | None = None,
) -> int:
    graph = load_graph_file(config.graph_path, strict=config.strict)
    ranking, params = _read_ranking_artifact(ranking_path)
    curated = load_curated(config.curated_path)
    vuln_stats: dict[str, PackageVulnStats] = {}
    snapshot = None
    if vuln_path is not None:
        vuln_stats, snapshot = _read_vuln_artifact(vuln_path)
    metrics = _read_metrics_artifact(metrics_path) if metrics_path is not None else {}

    table = build_table(ranking, curated, vuln_stats, metrics, graph)
    report = build_report(
        table,
        generated_at=config.as_of,
        graph_summary={"node_count": graph.node_count, "edge_count": graph.edge_count},
        params=params,
        snapshot_meta=snapshot,
    )
    if config.fmt == "csv":
        if config.output is None:
            raise ValidationError("--format csv writes a bundle directory; --output is required")
        emit_report_bundle(report, config.output)
        print(f"wrote csv bundle to {config.output}", file=sys.stderr)
    else:
        _write_output(emit_report_json(report), config.output)
    return 0


# ---- graph inspect ------------------------------------------------------------


def cmd_graph_inspect(config: PipelineConfig, node: str | None, direction: str, depth: int, emit_subgraph: bool) -> int:
    graph = load_graph_file(config.graph_path, strict=config.strict)
    if node is None:
        doc = {
            "node_count": graph.node_count,
            "edge_count": graph.edge_count,
            "ingest": {
                "duplicate_edges": graph.ingest.duplicate_edges,
                "dropped_dangling": graph.ingest.dropped_dangling,
                "ignored_edge_labels": graph.ingest.ignored_edge_labels,
            },
        }
    elif emit_subgraph:
        doc = to_document(graph.subgraph({node}, direction=direction, depth=depth))
    else:
        record = graph.nodes[node] if node in graph else None
        if record is None:
            raise ValidationError(f"unknown node id {node!r}")
        doc = {
            "id": record.id,
            "name": record.name,
            "version": record.version,
            "licenses": list(record.licenses),
            "in_degree": graph.in_degree(node),
            "out_degree": len(graph.dependencies(node)),
            "reverse_dependencies": sorted(graph.reverse_dependencies(node)),
            "transitive_reverse_dependency_count": len(graph.transitive_reverse_dependencies(node)),
        }
    _write_output(canonical_json(doc), config.output)
    return 0


# ---- argument parsing -----------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strict", action="store_true", help="treat recoverable input problems as errors")
    parser.add_argument("--output", type=Path, default=None, help="output path (default: stdout)")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"depscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rank = sub.add_parser("rank", help="compute the Katz centrality ranking")
    p_rank.add_argument("--graph", type=Path, required=True, help="graph export document")
    p_rank.add_argument("--top-k", type=int, default=200)
    p_rank.add_argument("--alpha", type=float, default=0.1)
    p_rank.add_argument("--beta", type=float, default=1.0)
    p_rank.add_argument("--tolerance", type=float, default=1e-6)
    p_rank.add_argument("--max-iterations", type=int, default=1000)
    p_rank.add_argument("--no-normalize", action="store_true")
    p_rank.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p_rank)

    p_vuln = sub.add_parser("vuln", help="fetch the vulnerability tracker and aggregate per package")
    p_vuln.add_argument("--curated", type=Path, required=True, help="curated metadata CSV")
    p_vuln.add_argument(
        "--endpoint",
        default=os.environ.get("DEPSCOPE_TRACKER_URL", vulndb.DEFAULT_TRACKER_URL),
        help="tracker JSON endpoint (env DEPSCOPE_TRACKER_URL)",
    )
    p_vuln.add_argument("--cache-dir", type=Path, default=None, help="cache directory (env DEPSCOPE_CACHE_DIR)")
    p_vuln.add_argument("--max-age-hours", type=float, default=24.0)
    p_vuln.add_argument("--offline", action="store_true", help="never touch the network, use the cache")
    p_vuln.add_argument("--release", default="stable")
    _add_common(p_vuln)

    p_metrics = sub.add_parser("metrics", help="mine git maintenance metrics")
    p_metrics.add_argument("--curated", type=Path, required=True)
    p_metrics.add_argument("--repos-dir", type=Path, required=True, help="directory of clones or interchange files")
    p_metrics.add_argument("--as-of", type=_parse_as_of, default=None, help="evaluation date YYYY-MM-DD")
    p_metrics.add_argument("--bucket", choices=("month", "year"), default="month")
    p_metrics.add_argument("--baseline-date", action="store_true", help="pin the evaluation date to the 2024-03-18 baseline")
    _add_common(p_metrics)

    p_report = sub.add_parser("report", help="join artifacts and emit the final report")
    p_report.add_argument("--graph", type=Path, required=True)
    p_report.add_argument("--ranking", type=Path, required=True, help="ranking artifact (json)")
    p_report.add_argument("--curated", type=Path, required=True)
    p_report.add_argument("--vuln", type=Path, default=None, help="vuln stats artifact")
    p_report.add_argument("--metrics", type=Path, default=None, help="repo metrics artifact")
    p_report.add_argument("--as-of", type=_parse_as_of, default=None)
    p_report.add_argument("--baseline-date", action="store_true", help="pin the evaluation date to the 2024-03-18 baseline")
    p_report.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p_report)

    p_graph = sub.add_parser("graph", help="graph utilities")
    graph_sub = p_graph.add_subparsers(dest="graph_command", required=True)
    p_inspect = graph_sub.add_parser("inspect", help="summarize the graph or one node")
    p_inspect.add_argument("--graph", type=Path, required=True)
    p_inspect.add_argument("--node", default=None)
    p_inspect.add_argument("--direction", choices=("forward", "reverse"), default="forward")
    p_inspect.add_argument("--depth", type=int, default=1)
    p_inspect.add_argument("--emit-subgraph", action="store_true", help="print the induced subgraph as an export document")
    _add_common(p_inspect)

    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    config.strict = getattr(args, "strict", False)
    config.output = getattr(args, "output", None)
    config.graph_path = getattr(args, "graph", None)
    config.curated_path = getattr(args, "curated", None)
    if getattr(args, "format", None):
        config.fmt = args.format
    if getattr(args, "endpoint", None):
        config.tracker_endpoint = args.endpoint
    if getattr(args, "cache_dir", None):
        config.cache_dir = args.cache_dir
    if getattr(args, "release", None):
        config.release = args.release
    if getattr(args, "top_k", None):
        config.top_k = args.top_k
    if getattr(args, "max_age_hours", None) is not None:
        config.max_age = timedelta(hours=args.max_age_hours)
    config.offline = getattr(args, "offline", False)
    if getattr(args, "baseline_date", False):
        config.as_of = BASELINE_AS_OF
    if getattr(args, "as_of", None) is not None:
        config.as_of = args.as_of
    if hasattr(args, "alpha"):
        config.centrality = CentralityParams(
            alpha=args.alpha,
            beta=args.beta,
            tolerance=args.tolerance,
            max_iterations=args.max_iterations,
            normalize=not args.no_normalize,
        )
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _config_from_args(args)
        if args.command == "rank":
            return cmd_rank(config)
        if args.command == "vuln":
            return cmd_vuln(config)
        if args.command == "metrics":
            return cmd_metrics(config, args.repos_dir, bucket=args.bucket)
        if args.command == "report":
            return cmd_report(config, args.ranking, args.vuln, args.metrics)
        if args.command == "graph":
            return cmd_graph_inspect(config, args.node, args.direction, args.depth, args.emit_subgraph)
        raise AssertionError(f"unhandled command {args.command!r}")
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: lower --alpha below the reciprocal spectral radius and retry", file=sys.stderr)
        return exc.exit_code
    except DepscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
