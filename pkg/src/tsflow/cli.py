"""Command-line frontend: validate, run, serve, import and query workflows."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import engine
from .catalog import CompetencyQueries, Store, create_app
from .document import parse_document, validate
from .errors import TsflowError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _store_root(store: str | None) -> str:
    return store or os.environ.get("TSFLOW_STORE", "./tsflow-store")


@click.group()
def main():
    """Time-series workflow toolkit."""


@main.command()
@click.argument("file", type=click.Path())
def validate_cmd(file):
    """Validate a workflow document and print the report as JSON."""
    text = _read_file(file)
    try:
        doc = parse_document(text)
    except TsflowError as exc:
        click.echo(json.dumps({"valid": False, "diagnostics": [
            {"severity": "error", "path": "/", "code": exc.code,
             "message": exc.message}]}, indent=2))
        sys.exit(EXIT_IO)
    report = validate(doc)
    click.echo(json.dumps(report.to_dict(), indent=2))
    sys.exit(EXIT_OK if report.valid else EXIT_INVALID)


main.add_command(validate_cmd, name="validate")


@main.command()
@click.argument("file", type=click.Path())
@click.option("--horizon", default=10, show_default=True)
@click.option("--data-root", default=".", show_default=True)
@click.option("--out", "out_dir", default="./out", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
def run(file, horizon, data_root, out_dir, as_json):
    """Validate and execute a workflow; write the bundle and plots."""
    text = _read_file(file)
    try:
        doc = parse_document(text)
    except TsflowError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(EXIT_IO)
    report = validate(doc)
    if not report.valid:
        click.echo(json.dumps(report.to_dict(), indent=2))
        sys.exit(EXIT_INVALID)
    try:
        bundle = engine.execute(doc, data_root, out_dir, forecast_horizon=horizon)
    except TsflowError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_INVALID)

    if as_json:
        click.echo(bundle.to_json())
    else:
        click.echo(f"workflow : {bundle.workflow_id}")
        click.echo(f"run      : {bundle.run_id}  ({bundle.run_dir})")
        click.echo(f"status   : {bundle.status}")
        click.echo(f"steps    : {len(bundle.steps)}")
        for w in bundle.warnings:
            click.echo(f"warning  : {w}")
        measures = [s for s in bundle.steps
                    if s.outcome.get("kind") == "measures"]
        for step in measures:
            click.echo("measures :")
            for row in step.outcome["rows"]:
                click.echo(f"  {row['model']:<14} {row['measure']:<12} "
                           f"{row['value']:.6g}")
        if measures:
            metric = measures[0].outcome["rows"][0]["measure"]
            best = engine.best_model(bundle, metric)
            click.echo(f"best ({metric}): {best['model']} = {best['value']:.6g}")
    if bundle.status == "failed":
        sys.exit(EXIT_INVALID)
    sys.exit(EXIT_OK if bundle.status == "succeeded" else EXIT_PARTIAL)


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--store", default=None, help="store root (or env TSFLOW_STORE)")
@click.option("--data-root", default=".", show_default=True)
def serve(port, store, data_root):
    """Start the catalog HTTP service."""
    import uvicorn

    app = create_app(Store(_store_root(store)), data_root=data_root)
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command(name="import")
@click.argument("file", type=click.Path())
@click.option("--url", default=None, help="catalog service base URL")
@click.option("--offline", is_flag=True, help="write directly to the store")
@click.option("--store", default=None)
@click.option("--force", is_flag=True, help="replace an existing entry")
def import_cmd(file, url, offline, store, force):
    """Import a workflow document into a catalog."""
    text = _read_file(file)
    if offline or url is None:
        try:
            iri, report = Store(_store_root(store)).import_document(text, force=force)
        except TsflowError as exc:
            click.echo(f"error: {exc.code}: {exc.message}", err=True)
            sys.exit(EXIT_INVALID)
        if iri is None:
            click.echo(json.dumps(report.to_dict(), indent=2))
            sys.exit(EXIT_INVALID)
        click.echo(json.dumps({"id": iri}))
        sys.exit(EXIT_OK)
    import httpx

    try:
        resp = httpx.post(f"{url.rstrip('/')}/workflows", content=text,
                          params={"force": force},
                          headers={"content-type": "application/ld+json"})
    except httpx.HTTPError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(resp.text)
    sys.exit(EXIT_OK if resp.status_code == 201 else EXIT_INVALID)


@main.command()
@click.argument("cq")
@click.option("--id", "workflow_id", default=None)
@click.option("--term", default=None)
@click.option("--run-id", default=None)
@click.option("--horizon", default=None, type=int)
@click.option("--metric", default=None)
@click.option("--url", default=None, help="catalog service base URL")
@click.option("--store", default=None)
def query(cq, workflow_id, term, run_id, horizon, metric, url, store):
    """Answer a competency question (cq01..cq10) and print JSON."""
    number = cq.lower().removeprefix("cq")
    params = {k: v for k, v in (
        ("id", workflow_id), ("term", term), ("run_id", run_id),
        ("horizon", horizon), ("metric", metric)) if v is not None}
    if url is not None:
        import httpx

        try:
            resp = httpx.get(f"{url.rstrip('/')}/cq/{int(number):02d}", params=params)
        except httpx.HTTPError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        click.echo(resp.text)
        sys.exit(EXIT_OK if resp.status_code == 200 else EXIT_INVALID)

    queries = CompetencyQueries(Store(_store_root(store)))
    handlers = {
        "01": lambda: queries.cq01_operations_count(workflow_id),
        "02": lambda: queries.cq02_services_with_ts_functions(),
        "03": lambda: queries.cq03_provides_algorithm(workflow_id, term),
        "04": lambda: queries.cq04_input_of(workflow_id),
        "05": lambda: queries.cq05_outputs_of(workflow_id),
        "06": lambda: queries.cq06_cost_of(workflow_id),
        "07": lambda: queries.cq07_auth_of(workflow_id),
        "08": lambda: queries.cq08_parameters_of(workflow_id, term),
        "09": lambda: queries.cq09_forecast_of(run_id, horizon),
        "10": lambda: queries.cq10_best_model_of(run_id, metric),
    }
    key = f"{int(number):02d}" if number.isdigit() else number
    if key not in handlers:
        click.echo(f"error: unknown competency question {cq!r}", err=True)
        sys.exit(EXIT_IO)
    try:
        answer = handlers[key]()
    except TsflowError as exc:
        click.echo(json.dumps({"error": exc.code, "message": exc.message}))
        sys.exit(EXIT_INVALID)
    click.echo(json.dumps({"answer": answer}, indent=2))
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
