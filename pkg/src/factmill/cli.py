"""Command-line entry points for the extraction and ingestion pipelines.

Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 golden-set
mismatch.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import ConfigError, load_config
from .model import Clock, SimulatedClock

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_GOLDEN_MISMATCH = 3


def _load(config_path, **overrides):
    try:
        return load_config(config_path, {k: v for k, v in overrides.items() if v is not None})
    except (ConfigError, FileNotFoundError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="enable debug logging")
def main(verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@main.command("run-batch")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--workers", type=int, default=None, help="override worker count")
@click.option("--run-id", default="batch")
@click.option("--out", default=None, help="write the run report to this path")
def run_batch_cmd(config_path, workers, run_id, out):
    """Full batch pipeline: initiate, retrieve, extract, corroborate, ingest."""
    from .pipeline import run_batch

    config = _load(config_path, workers=workers)
    try:
        report = run_batch(config, run_id=run_id)
    except Exception as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _emit(report.to_json(), out)
    if report.precision is not None and (report.precision < 1.0 or report.recall < 1.0):
        click.echo("golden-set mismatch", err=True)
        sys.exit(EXIT_GOLDEN_MISMATCH)


@main.command("run-stream")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--simulated-clock/--wall-clock", default=True)
@click.option("--start", default="2024-01-01T00:00:00Z", help="simulated clock start")
@click.option("--run-id", default="stream")
@click.option("--out", default=None)
def run_stream_cmd(config_path, simulated_clock, start, run_id, out):
    """Streaming pipeline: poll the change feed until exhausted."""
    from .model import parse_ts
    from .pipeline import run_stream

    config = _load(config_path)
    clock = SimulatedClock(parse_ts(start)) if simulated_clock else Clock()
    try:
        sla, report = run_stream(config, clock, run_id=run_id)
    except Exception as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _emit({"sla": sla.to_json(), "report": report.to_json()}, out)


@main.command("infer-links")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run-id", default="link_inference")
@click.option("--corrections/--no-corrections", default=True)
@click.option("--out", default=None)
def infer_links_cmd(config_path, run_id, corrections, out):
    """Run completeness and correctness link inference over the latest view."""
    from .link_inference import (
        apply_inferred,
        infer_completeness,
        infer_correctness,
        load_link_rules,
    )
    from .pipeline import PipelineContext

    config = _load(config_path)
    if config.link_rules_path is None:
        click.echo("config error: paths.link_rules not set", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        ctx = PipelineContext.from_config(config)
        rules = load_link_rules(config.link_rules_path, ctx.ontology)
        view = ctx.log.materialize_latest()
        completeness = infer_completeness(view, rules, ctx.ontology)
        inferred = list(completeness.inferred)
        if corrections:
            inferred.extend(i for i, _replaced in infer_correctness(view, rules, ctx.ontology))
        summary = apply_inferred(inferred, ctx.kg, ctx.log, run_id)
    except Exception as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _emit(
        {
            "inferred": len(inferred),
            "appended": summary.appended,
            "skipped_missing_condition": completeness.skipped_missing_condition,
        },
        out,
    )


@main.command("materialize")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, help="write the view artifact to this path")
def materialize_cmd(config_path, out):
    """Materialize the latest view from the fact log."""
    from .model import value_to_json
    from .pipeline import PipelineContext

    config = _load(config_path)
    try:
        ctx = PipelineContext.from_config(config)
        view = ctx.log.materialize_latest()
    except Exception as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    payload = {
        "schema": "factmill.latest_view",
        "version": 1,
        "facts": {key: fact.to_json() for key, fact in view},
    }
    _emit(payload, out)


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8700)
@click.option("--static-dir", type=click.Path(), default=None, help="frontend build directory")
def serve_cmd(config_path, port, static_dir):
    """Serve the curation API (and the frontend build when present)."""
    from .api import serve
    from .curation import TaskStore

    config = _load(config_path)
    journal = config.journal_path
    try:
        if journal and Path(journal).exists():
            store = TaskStore.replay(journal)
            store.journal_path = Path(journal)
        else:
            store = TaskStore(journal_path=journal)
        serve(store, port, static_dir=Path(static_dir) if static_dir else None)
    except OSError as exc:
        click.echo(f"startup error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


@main.command("stats")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None)
def stats_cmd(config_path, out):
    """Counts from the latest view: facts, subjects, per-predicate totals."""
    from .pipeline import PipelineContext

    config = _load(config_path)
    try:
        ctx = PipelineContext.from_config(config)
        view = ctx.log.materialize_latest()
    except Exception as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    per_predicate: dict = {}
    subjects = set()
    for _key, fact in view:
        per_predicate[fact.predicate] = per_predicate.get(fact.predicate, 0) + 1
        subjects.add(fact.subject)
    _emit(
        {
            "facts": len(view),
            "subjects": len(subjects),
            "entities": len(ctx.kg.entities),
            "per_predicate": dict(sorted(per_predicate.items())),
        },
        out,
    )


if __name__ == "__main__":
    main()
