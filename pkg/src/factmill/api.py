"""HTTP curation service: browse tasks, submit decisions, read stats.

Errors carry machine-readable codes; a static frontend build (when
present) is served from the same process.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .curation import CurationError, Decision, DecisionConflict, TaskStore
from .model import Clock, value_from_json

logger = logging.getLogger(__name__)


class DecisionBody(BaseModel):
    verdict: str  # accept | reject_all | amend
    cluster_id: Optional[str] = None
    amended_value: Optional[dict] = None


def create_app(
    store: TaskStore,
    clock: Optional[Clock] = None,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    clock = clock or Clock()
    app = FastAPI(title="factmill curation")

    @app.get("/tasks")
    def list_tasks(
        status: Optional[str] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=20, ge=1, le=100),
    ):
        tasks, total = store.list_tasks(status=status, page=page, page_size=page_size)
        return {
            "tasks": [t.to_json() for t in tasks],
            "total": total,
            "page": page,
            "page_size": page_size,
        }

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        try:
            return store.get(task_id).to_json()
        except CurationError:
            raise HTTPException(status_code=404, detail={"code": "task_not_found"})

    @app.post("/tasks/{task_id}/decision")
    def post_decision(
        task_id: str,
        body: DecisionBody,
        x_curator_id: str = Header(default="anonymous"),
    ):
        amended = None
        if body.amended_value is not None:
            try:
                amended = value_from_json(body.amended_value)
            except (KeyError, ValueError) as exc:
                raise HTTPException(
                    status_code=422, detail={"code": "bad_value", "message": str(exc)}
                )
        decision = Decision(
            task_id=task_id,
            verdict=body.verdict,
            curator_id=x_curator_id,
            decided_at=clock.now_iso(),
            cluster_id=body.cluster_id,
            amended_value=amended,
        )
        try:
            task = store.decide(decision)
        except DecisionConflict:
            existing = store.get(task_id)
            return JSONResponse(
                status_code=409,
                content={
                    "code": "already_decided",
                    "decision": existing.decision.to_json(),
                },
            )
        except CurationError as exc:
            raise HTTPException(status_code=422, detail={"code": "bad_decision", "message": str(exc)})
        return task.to_json()

    @app.get("/stats")
    def stats():
        return store.stats()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def serve(store: TaskStore, port: int, static_dir: Optional[Path] = None) -> None:
    import uvicorn

    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="info")
