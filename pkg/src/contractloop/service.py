"""HTTP API for the review frontend.

Read endpoints reload the project file on every request, so they always
reflect the latest persisted state, including checkpoints written by a
pipeline run in progress. Write endpoints are serialized by a single lock:
load, mutate, save atomically.

Status codes: 404 unknown id, 409 illegal lifecycle transition or locked
project, 422 parse/validation failure with machine-readable detail.
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import orchestrator
from .errors import (
    ClauseValidationError,
    ContractLoopError,
    IllegalTransitionError,
    ProjectLockedError,
    UnknownContractError,
    UnknownNodeError,
)
from .ids import new_id
from .lang import normalize, parse
from .registry import ContractRegistry
from .store import NODE_KINDS, ProjectStore
from .testgen import GenerationConfig


class ReviewBody(BaseModel):
    decision: str  # "approve" | "reject"
    note: Optional[str] = None


class ReviseBody(BaseModel):
    new_text: str
    note: Optional[str] = None


class ValidateBody(BaseModel):
    text: str
    dialect: str = "java_like"


class PipelineBody(BaseModel):
    intent: str
    auto_approve: bool = True
    max_repair_iterations: int = 2
    n_valid: int = 50
    n_violating_per_clause: int = 5
    seed: Optional[int] = None


def _contract_view(contract_id, record, task):
    clause = record["clause"]
    return {
        "contract_id": contract_id,
        "clause_id": clause["clause_id"],
        "task_id": record["task_id"],
        "task_title": task["title"],
        "kind": clause["kind"],
        "element": clause["element"],
        "normalized_text": clause["normalized_text"],
        "source_text": clause["source_text"],
        "status": record["status"],
        "provenance": record["provenance"],
        "revision_of": record.get("revision_of"),
        "review_note": record.get("review_note"),
    }


def create_app(project_dir: str, provider_spec: Optional[str] = None, seed: int = 0):
    app = FastAPI(title="contractloop", version="1.0")
    write_lock = threading.Lock()
    runs_in_flight = {}

    def load() -> ProjectStore:
        path = orchestrator.project_file(project_dir)
        try:
            return ProjectStore.load(path)
        except FileNotFoundError:
            raise HTTPException(404, detail=f"no project at {path}")

    def provider():
        if provider_spec is None:
            raise HTTPException(422, detail="service started without a provider; "
                                            "pipeline runs are disabled")
        from .cli import Context

        return Context(project_dir, provider_spec, seed).provider()

    @app.get("/api/tasks")
    def list_tasks():
        store = load()
        return [
            {"task_id": task_id, **{k: v for k, v in task.items()}}
            for task_id, task in sorted(store.nodes["task"].items())
        ]

    @app.get("/api/contracts")
    def list_contracts(status: Optional[str] = None, task_id: Optional[str] = None):
        store = load()
        out = []
        for contract_id, record in sorted(store.nodes["contract"].items()):
            if status is not None and record["status"] != status:
                continue
            if task_id is not None and record["task_id"] != task_id:
                continue
            task = store.get_node("task", record["task_id"])
            out.append(_contract_view(contract_id, record, task))
        return out

    @app.get("/api/lineage/{kind}/{node_id}")
    def lineage(kind: str, node_id: str):
        if kind not in NODE_KINDS:
            raise HTTPException(404, detail=f"unknown node kind {kind}")
        store = load()
        try:
            subgraph = store.lineage((kind, node_id))
        except UnknownNodeError as error:
            raise HTTPException(404, detail=str(error))
        return {
            "nodes": subgraph.nodes,
            "links": [
                {"from": list(l.from_ref), "to": list(l.to_ref), "edge_kind": l.edge_kind}
                for l in subgraph.links
            ],
        }

    @app.get("/api/tasks/{task_id}/report")
    def latest_report(task_id: str):
        store = load()
        if task_id not in store.nodes["task"]:
            raise HTTPException(404, detail=f"no task {task_id}")
        reports = {report_id: record for report_id, record in store.reports.items()
                   if record["task_id"] == task_id}
        if not reports:
            raise HTTPException(404, detail=f"no reports for task {task_id}")
        return reports[max(reports)]

    @app.get("/api/runs/{run_id}")
    def run_status(run_id: str):
        store = load()
        record = store.runs.get(run_id)
        if record is None:
            if run_id in runs_in_flight:
                return {"run_id": run_id, "phases": [], "terminal_status": None}
            raise HTTPException(404, detail=f"no run {run_id}")
        return record

    @app.post("/api/contracts/{contract_id}/review")
    def review(contract_id: str, body: ReviewBody):
        if body.decision not in ("approve", "reject"):
            raise HTTPException(422, detail="decision must be approve or reject")
        with write_lock:
            store = load()
            registry = ContractRegistry(store)
            try:
                record = registry.review(contract_id, body.decision, note=body.note)
            except UnknownContractError as error:
                raise HTTPException(404, detail=str(error))
            except IllegalTransitionError as error:
                raise HTTPException(409, detail=str(error))
            store.save()
            return _contract_view(contract_id, record,
                                  store.get_node("task", record["task_id"]))

    @app.post("/api/contracts/{contract_id}/revise")
    def revise(contract_id: str, body: ReviseBody):
        with write_lock:
            store = load()
            registry = ContractRegistry(store)
            try:
                new_contract_id = registry.revise(contract_id, body.new_text,
                                                  note=body.note)
            except UnknownContractError as error:
                raise HTTPException(404, detail=str(error))
            except IllegalTransitionError as error:
                raise HTTPException(409, detail=str(error))
            except ClauseValidationError as error:
                raise HTTPException(422, detail=str(error))
            store.save()
            record = store.get_node("contract", new_contract_id)
            return _contract_view(new_contract_id, record,
                                  store.get_node("task", record["task_id"]))

    @app.post("/api/validate")
    def validate(body: ValidateBody):
        try:
            normalized = normalize(body.text, dialect=body.dialect)
            parse(normalized)
        except ContractLoopError as error:
            raise HTTPException(422, detail=str(error))
        except ValueError as error:
            raise HTTPException(422, detail=str(error))
        return {"normalized_text": normalized}

    @app.post("/api/pipeline", status_code=202)
    def trigger_pipeline(body: PipelineBody):
        handle = provider()
        config = orchestrator.PipelineConfig(
            provider=handle,
            project_dir=project_dir,
            max_repair_iterations=body.max_repair_iterations,
            testgen=GenerationConfig(
                n_valid=body.n_valid,
                n_violating_per_clause=body.n_violating_per_clause,
                seed=body.seed if body.seed is not None else seed,
            ),
            auto_approve=body.auto_approve,
        )
        run_id = new_id("run")

        def work():
            try:
                orchestrator.run_pipeline(body.intent, config, run_id=run_id)
            except ContractLoopError as error:
                runs_in_flight[run_id] = f"failed: {error}"
            finally:
                runs_in_flight.pop(run_id, None)

        # refuse immediately when another run holds the project
        lock_probe = orchestrator._ProjectLock(config.project_dir)
        try:
            lock_probe.__enter__()
        except ProjectLockedError as error:
            raise HTTPException(409, detail=str(error))
        lock_probe.__exit__(None, None, None)

        runs_in_flight[run_id] = "running"
        thread = threading.Thread(target=work, daemon=True)
        thread.start()
        return {"run_id": run_id}

    return app
