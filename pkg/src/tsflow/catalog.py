"""Marketplace catalog: import, store, list, run and query workflow documents.

Persistence is a directory per entry with atomic-rename writes, so a crash
mid-import leaves either the previous state or nothing. The index is rebuilt
from disk on startup; raw document bytes are stored verbatim.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import engine, vocabulary
from .document import ValidationReport, WorkflowDoc, parse_document, validate
from .errors import Conflict, NotFound, StorageError, TsflowError
from .vocabulary import TermRegistry

_WORKFLOW_CATEGORIES = ("InformationAnalysis", "StationaryAnalysis", "PredictiveModel")


def _slug(iri: str) -> str:
    return hashlib.sha256(iri.encode("utf-8")).hexdigest()[:16]


def _atomic_write(path: Path, data: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


@dataclass
class CatalogEntry:
    doc: WorkflowDoc
    raw: str
    imported_at: str
    runs: list


class Store:
    """Directory-backed catalog of validated workflow documents."""

    def __init__(self, root):
        self.root = Path(root)
        (self.root / "entries").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: dict[str, CatalogEntry] = {}
        self._load()

    def _entry_dir(self, iri: str) -> Path:
        return self.root / "entries" / _slug(iri)

    def _load(self):
        for entry_dir in sorted((self.root / "entries").iterdir()):
            meta_path = entry_dir / "meta.json"
            raw_path = entry_dir / "raw.jsonld"
            if not (meta_path.is_file() and raw_path.is_file()):
                continue  # incomplete entry from an interrupted import
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            raw = raw_path.read_text(encoding="utf-8")
            runs = sorted(
                p.name for p in (entry_dir / "runs").iterdir()
            ) if (entry_dir / "runs").is_dir() else []
            self._index[meta["iri"]] = CatalogEntry(
                doc=parse_document(raw), raw=raw,
                imported_at=meta["imported_at"], runs=runs)

    # ------------------------------------------------------------ writes

    def import_document(self, text: str, force: bool = False):
        """Validate and persist a document; returns (iri_or_None, report)."""
        try:
            doc = parse_document(text)
        except TsflowError as exc:
            from .document import Diagnostic
            report = ValidationReport((Diagnostic(
                "error", "/", exc.code, exc.message),))
            return None, report
        report = validate(doc)
        if not report.valid:
            return None, report

        with self._lock:
            existing = self._index.get(doc.id)
            if existing is not None:
                if existing.raw == text:
                    return doc.id, report  # idempotent re-import
                if not force:
                    raise Conflict(f"{doc.id} already imported with different content")
            entry_dir = self._entry_dir(doc.id)
            try:
                entry_dir.mkdir(parents=True, exist_ok=True)
                imported_at = (existing.imported_at if existing
                               else datetime.now(timezone.utc).isoformat())
                _atomic_write(entry_dir / "raw.jsonld", text)
                _atomic_write(entry_dir / "meta.json", json.dumps(
                    {"iri": doc.id, "imported_at": imported_at},
                    indent=2, sort_keys=True))
            except OSError as exc:
                raise StorageError(str(exc)) from exc
            self._index[doc.id] = CatalogEntry(
                doc=doc, raw=text, imported_at=imported_at,
                runs=existing.runs if existing else [])
        return doc.id, report

    def run_workflow(self, iri: str, horizon: int, data_root) -> str:
        entry = self.get(iri)
        runs_dir = self._entry_dir(iri) / "runs"
        bundle = engine.execute(entry.doc, data_root, runs_dir,
                                forecast_horizon=horizon)
        with self._lock:
            entry.runs.append(f"run_{bundle.run_id}")
        return bundle.run_id

    # ------------------------------------------------------------- reads

    def get(self, iri: str) -> CatalogEntry:
        entry = self._index.get(iri)
        if entry is None:
            raise NotFound(f"no catalog entry for {iri}")
        return entry

    def list_entries(self):
        entries = sorted(self._index.items(),
                         key=lambda kv: (kv[1].imported_at, kv[0]))
        return [
            {"id": iri, "name": e.doc.name, "imported_at": e.imported_at,
             "runs": list(e.runs)}
            for iri, e in entries
        ]

    def load_bundle(self, run_id: str) -> dict:
        dirname = run_id if run_id.startswith("run_") else f"run_{run_id}"
        for iri, entry in self._index.items():
            path = self._entry_dir(iri) / "runs" / dirname / "bundle.json"
            if path.is_file():
                return json.loads(path.read_text(encoding="utf-8"))
        raise NotFound(f"no run {run_id}")


# ---------------------------------------------------------------- queries


class CompetencyQueries:
    """Fixed query API over the catalog, one method per competency question."""

    def __init__(self, store: Store, registry: TermRegistry | None = None):
        self.store = store
        self.registry = registry or vocabulary.load_vocabulary()

    def cq01_operations_count(self, iri: str) -> int:
        return engine.expected_step_count(self.store.get(iri).doc)

    def cq02_services_with_ts_functions(self) -> list[str]:
        out = []
        for item in self.store.list_entries():
            doc = self.store.get(item["id"]).doc
            ops = list(doc.info_analyses) + list(doc.stationary_analyses) \
                + list(doc.models)
            if any(self.registry.resolve(op.term).category in _WORKFLOW_CATEGORIES
                   for op in ops if op.term in self.registry):
                out.append(item["id"])
        return out

    def cq03_provides_algorithm(self, iri: str, term: str) -> bool:
        doc = self.store.get(iri).doc
        try:
            resolved = self.registry.resolve(term)
        except TsflowError:
            return False
        if not resolved.executable:
            return False
        return any(op.term == resolved.curie for op in doc.models)

    def cq04_input_of(self, iri: str) -> dict:
        spec = self.store.get(iri).doc.input
        if spec is None:
            return {"source_kind": None, "src": None, "fields": []}
        return {"source_kind": spec.source_kind, "src": spec.src,
                "fields": [dict(f) for f in spec.fields]}

    def cq05_outputs_of(self, iri: str) -> list[dict]:
        return [
            {"id": out.id, "kind": out.kind, "measures": list(out.measures)}
            for out in self.store.get(iri).doc.outputs
        ]

    def cq06_cost_of(self, iri: str):
        meta = self.store.get(iri).doc.service_meta
        if meta is None or meta.cost_amount is None:
            return "unspecified"
        return {"amount": meta.cost_amount, "currency": meta.cost_currency}

    def cq07_auth_of(self, iri: str):
        meta = self.store.get(iri).doc.service_meta
        if meta is None or meta.auth_required is None:
            return "unspecified"
        return meta.auth_required

    def cq08_parameters_of(self, iri: str, term: str) -> dict:
        doc = self.store.get(iri).doc
        resolved = self.registry.resolve(term)
        for op in doc.models + doc.plots + doc.info_analyses \
                + doc.stationary_analyses + doc.preprocessing:
            if op.term == resolved.curie:
                out = {}
                for spec in resolved.params:
                    explicit = spec.name in op.params
                    out[spec.name] = {
                        "value": op.params[spec.name] if explicit else spec.default,
                        "default": not explicit,
                    }
                return out
        raise NotFound(f"{term} is not used by {iri}")

    def cq09_forecast_of(self, run_id: str, horizon: int) -> list[dict]:
        bundle = self.store.load_bundle(run_id)
        out = []
        for step in bundle["steps"]:
            if step["outcome"].get("kind") == "forecast":
                stored = step["outcome"]["horizon"]
                if horizon > stored:
                    raise NotFound(
                        f"horizon {horizon} exceeds stored horizon {stored}")
                out.append({"model": step["outcome"]["model"],
                            "point": step["outcome"]["point"][:horizon]})
        if not out:
            raise NotFound(f"run {run_id} has no forecasts")
        return out

    def cq10_best_model_of(self, run_id: str, metric: str) -> dict:
        bundle = self.store.load_bundle(run_id)
        best = None
        for step in bundle["steps"]:
            if step["outcome"].get("kind") != "measures":
                continue
            for row in step["outcome"]["rows"]:
                if row["measure"] == metric and (
                        best is None or row["value"] < best["value"]):
                    best = {"model": row["model"], "value": row["value"]}
        if best is None:
            raise NotFound(f"no {metric} values in run {run_id}")
        return best


# ---------------------------------------------------------------- HTTP app


def create_app(store: Store, data_root=None):
    """FastAPI application exposing the catalog and the query endpoints."""
    app = FastAPI(title="tsflow catalog")
    cq = CompetencyQueries(store)
    data_root = Path(data_root) if data_root else Path(".")

    def _resolve_iri(raw_id: str) -> str:
        if raw_id in store._index:
            return raw_id
        for iri in store._index:
            if iri.endswith(raw_id) or iri.split("#")[-1] == raw_id:
                return iri
        raise NotFound(f"no catalog entry for {raw_id}")

    @app.exception_handler(TsflowError)
    async def _tsflow_error(request, exc: TsflowError):
        status = {"NotFound": 404, "Conflict": 409}.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "message": exc.message})

    @app.post("/workflows", status_code=201)
    async def import_workflow(request: Request, force: bool = False):
        text = (await request.body()).decode("utf-8")
        iri, report = store.import_document(text, force=force)
        if iri is None:
            return JSONResponse(status_code=422, content=report.to_dict())
        return {"id": iri}

    @app.get("/workflows")
    def list_workflows():
        return store.list_entries()

    @app.get("/workflows/{workflow_id:path}/raw")
    def download_workflow(workflow_id: str):
        entry = store.get(_resolve_iri(workflow_id))
        return Response(content=entry.raw, media_type="application/ld+json")

    @app.post("/workflows/{workflow_id:path}/runs", status_code=202)
    def run_workflow(workflow_id: str, horizon: int = 10):
        iri = _resolve_iri(workflow_id)
        run_id = store.run_workflow(iri, horizon, data_root)
        return {"run_id": run_id}

    @app.get("/workflows/{workflow_id:path}")
    def get_workflow(workflow_id: str):
        iri = _resolve_iri(workflow_id)
        entry = store.get(iri)
        return {"id": iri, "name": entry.doc.name,
                "description": entry.doc.description,
                "imported_at": entry.imported_at, "runs": list(entry.runs)}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.load_bundle(run_id)

    @app.get("/cq/01")
    def q01(id: str):
        return {"answer": cq.cq01_operations_count(_resolve_iri(id))}

    @app.get("/cq/02")
    def q02():
        return {"answer": cq.cq02_services_with_ts_functions()}

    @app.get("/cq/03")
    def q03(id: str, term: str):
        return {"answer": cq.cq03_provides_algorithm(_resolve_iri(id), term)}

    @app.get("/cq/04")
    def q04(id: str):
        return {"answer": cq.cq04_input_of(_resolve_iri(id))}

    @app.get("/cq/05")
    def q05(id: str):
        return {"answer": cq.cq05_outputs_of(_resolve_iri(id))}

    @app.get("/cq/06")
    def q06(id: str):
        return {"answer": cq.cq06_cost_of(_resolve_iri(id))}

    @app.get("/cq/07")
    def q07(id: str):
        return {"answer": cq.cq07_auth_of(_resolve_iri(id))}

    @app.get("/cq/08")
    def q08(id: str, term: str):
        return {"answer": cq.cq08_parameters_of(_resolve_iri(id), term)}

    @app.get("/cq/09")
    def q09(run_id: str, horizon: int):
        return {"answer": cq.cq09_forecast_of(run_id, horizon)}

    @app.get("/cq/10")
    def q10(run_id: str, metric: str):
        return {"answer": cq.cq10_best_model_of(run_id, metric)}

    return app
