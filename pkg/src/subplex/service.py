"""Session-oriented HTTP facade over the engine.

Upload an attribution matrix, run the cluster/project/rank pipeline, then
read layouts and rankings, manage the selection, and edit subpopulations.
Sessions live in memory; every mutation is atomic per session, and a
partition edit regenerates the layout and rankings before they are next
served (no stale reads).
"""

from __future__ import annotations

import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .analysis import feature_histograms, selection_split_stats
from .cluster import Partition, add_subpopulation, remove_subpopulation
from .data import (
    AttributionMatrix,
    IngestConfig,
    Selection,
    export_group_aggregates,
    export_selected_instances,
    load_attributions,
    load_attributions_json,
)
from .errors import ParseError, RangeError, SubplexError, ValidationError
from .kernels import ReducedMatrix
from .pipeline import (
    PipelineConfig,
    compute_outliers,
    layout_to_json,
    project_and_rank,
    run_pipeline,
    rankings_to_json,
)
from .projection import ProjectionLayout

# pipeline runs with fewer value cells than this respond synchronously;
# larger ones return a job handle for polling
SYNC_CELL_LIMIT = 2_000_000


class ApiError(Exception):
    """Maps engine failures onto HTTP statuses."""

    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail
        super().__init__(detail)


@dataclass
class Job:
    job_id: str
    status: str = "running"  # running | done | error
    error: Optional[str] = None
    timings_ms: dict = field(default_factory=dict)


@dataclass
class Session:
    session_id: str
    config: PipelineConfig = field(default_factory=PipelineConfig)
    matrix: Optional[AttributionMatrix] = None
    reduced: Optional[ReducedMatrix] = None
    partition: Optional[Partition] = None
    layout: Optional[ProjectionLayout] = None
    mean_rankings: dict = field(default_factory=dict)
    deviation_ranking: object = None
    selection: Selection = Selection(())
    outliers: Selection = Selection(())
    stale: bool = False
    timings_ms: dict = field(default_factory=dict)
    jobs: dict = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, config: PipelineConfig) -> Session:
        sid = uuid.uuid4().hex[:12]
        session = Session(session_id=sid, config=config)
        with self._lock:
            self._sessions[sid] = session
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise ApiError(404, f"unknown session {sid!r}")
        return session


def _run_stages(session: Session) -> None:
    """Full pipeline into the session; caller holds the session lock."""
    result = run_pipeline(session.matrix, session.config)
    session.reduced = result.reduced
    session.partition = result.partition
    session.layout = result.layout
    session.mean_rankings = result.mean_rankings
    session.deviation_ranking = result.deviation_ranking
    session.outliers = result.outliers
    session.timings_ms = result.timings_ms
    session.stale = False


def _refresh(session: Session) -> None:
    """Regenerate layout/rankings after a partition edit, if needed."""
    if not session.stale:
        return
    t0 = time.perf_counter()
    layout, mean_rankings, deviation = project_and_rank(
        session.matrix, session.reduced, session.partition, session.config, session.outliers
    )
    session.layout = layout
    session.mean_rankings = mean_rankings
    session.deviation_ranking = deviation
    session.timings_ms["refresh"] = (time.perf_counter() - t0) * 1000.0
    session.stale = False


def _require_matrix(session: Session) -> AttributionMatrix:
    if session.matrix is None:
        raise ApiError(409, "no attribution matrix uploaded yet")
    return session.matrix


def _require_partition(session: Session) -> Partition:
    if session.partition is None:
        raise ApiError(409, "no partition computed yet; run the pipeline first")
    return session.partition


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="subplex service")
    store = store or SessionStore()
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.exception_handler(SubplexError)
    async def _engine_error(_req, exc: SubplexError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/sessions")
    async def create_session(request: Request):
        payload = await _json_body(request, default={})
        cfg_dict = payload.get("config", payload) if isinstance(payload, dict) else {}
        try:
            config = PipelineConfig.from_json_dict(cfg_dict or {})
        except SubplexError as exc:
            raise ApiError(422, str(exc))
        session = store.create(config)
        return {"session_id": session.session_id, "config": config.to_json_dict()}

    @app.post("/sessions/{sid}/attributions")
    async def upload(
        sid: str,
        request: Request,
        id_column: str | None = None,
        label_column: str | None = None,
    ):
        session = store.get(sid)
        body = await request.body()
        content_type = request.headers.get("content-type", "")
        config = IngestConfig(id_column=id_column, label_column=label_column)
        try:
            if "json" in content_type:
                matrix = load_attributions_json(json.loads(body.decode("utf-8")))
            else:
                matrix = load_attributions(io.StringIO(body.decode("utf-8")), config)
        except (ParseError, ValidationError, RangeError) as exc:
            raise ApiError(422, str(exc))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(422, f"unreadable body: {exc}")
        with session.lock:
            session.matrix = matrix
            session.reduced = None
            session.partition = None
            session.layout = None
            session.mean_rankings = {}
            session.deviation_ranking = None
            session.selection = Selection(())
            session.outliers = Selection(())
            session.stale = False
        return {"instances": matrix.n, "features": matrix.m}

    @app.post("/sessions/{sid}/pipeline")
    async def pipeline(sid: str, request: Request):
        session = store.get(sid)
        matrix = _require_matrix(session)
        overrides = await _json_body(request, default={})
        try:
            merged = dict(session.config.to_json_dict())
            merged.update(overrides or {})
            config = PipelineConfig.from_json_dict(merged)
        except SubplexError as exc:
            raise ApiError(422, str(exc))
        if config.k > matrix.n:
            raise ApiError(422, f"k={config.k} exceeds {matrix.n} instances")
        session.config = config

        if matrix.n * matrix.m <= SYNC_CELL_LIMIT:
            with session.lock:
                _run_stages(session)
            return {
                "status": "done",
                "groups": session.partition.k,
                "timings_ms": session.timings_ms,
            }

        job = Job(job_id=uuid.uuid4().hex[:12])
        session.jobs[job.job_id] = job

        def work():
            try:
                with session.lock:
                    _run_stages(session)
                job.timings_ms = session.timings_ms
                job.status = "done"
            except Exception as exc:  # surfaced via polling
                job.error = str(exc)
                job.status = "error"

        threading.Thread(target=work, daemon=True).start()
        return JSONResponse(
            status_code=202,
            content={"status": "running", "job_id": job.job_id},
        )

    @app.get("/sessions/{sid}/jobs/{job_id}")
    def job_status(sid: str, job_id: str):
        session = store.get(sid)
        job = session.jobs.get(job_id)
        if job is None:
            raise ApiError(404, f"unknown job {job_id!r}")
        out = {"status": job.status}
        if job.status == "done":
            out["timings_ms"] = job.timings_ms
        if job.error:
            out["error"] = job.error
        return out

    @app.get("/sessions/{sid}/layout")
    def layout(sid: str):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            partition = _require_partition(session)
            _refresh(session)
            return layout_to_json(matrix, partition, session.layout)

    @app.get("/sessions/{sid}/ranking")
    def ranking(sid: str, basis: str = "mean", group: int | None = None):
        session = store.get(sid)
        with session.lock:
            _require_matrix(session)
            partition = _require_partition(session)
            _refresh(session)
            if basis == "mean":
                if group is None:
                    raise ApiError(422, "basis=mean requires a group parameter")
                if group not in session.mean_rankings:
                    raise ApiError(422, f"unknown group {group}")
                return session.mean_rankings[group].to_json_dict()
            if basis == "deviation":
                if partition.k < 2:
                    raise ApiError(409, "deviation ranking needs at least 2 groups")
                return session.deviation_ranking.to_json_dict()
            raise ApiError(422, f"unknown basis {basis!r}")

    @app.get("/sessions/{sid}/rankings")
    def rankings(sid: str):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            _require_partition(session)
            _refresh(session)
            return rankings_to_json(
                session.mean_rankings,
                session.deviation_ranking,
                matrix.feature_names,
                session.config.bins,
            )

    @app.put("/sessions/{sid}/selection")
    async def set_selection(sid: str, request: Request):
        session = store.get(sid)
        matrix = _require_matrix(session)
        payload = await _json_body(request)
        if not isinstance(payload, dict) or "indices" not in payload:
            raise ApiError(422, 'body must be {"indices": [...]}')
        indices = payload["indices"]
        if not isinstance(indices, list):
            raise ApiError(422, "indices must be a list")
        for idx in indices:
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise ApiError(422, f"index {idx!r} is not an integer")
            if idx < 0 or idx >= matrix.n:
                raise ApiError(422, f"index {idx} out of range [0, {matrix.n})")
        with session.lock:
            session.selection = Selection.from_iterable(indices, matrix.n)
            return {"indices": list(session.selection.indices)}

    @app.get("/sessions/{sid}/selection")
    def get_selection(sid: str):
        session = store.get(sid)
        with session.lock:
            return {"indices": list(session.selection.indices)}

    @app.get("/sessions/{sid}/selection/instances")
    def selected_instances(sid: str):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            header, rows = export_selected_instances(matrix, session.selection)
            labels = None
            if session.partition is not None:
                labels = [int(session.partition.labels[i]) for i in session.selection.indices]
            return {"header": header, "rows": rows, "groups": labels}

    @app.get("/sessions/{sid}/selection/groups")
    def selected_groups(sid: str):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            partition = _require_partition(session)
            aggregates = export_group_aggregates(matrix, partition, session.selection)
            return {"aggregates": [a.to_json_dict() for a in aggregates]}

    @app.get("/sessions/{sid}/split")
    def split(sid: str):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            partition = _require_partition(session)
            _refresh(session)
            stats = selection_split_stats(matrix, partition, session.selection)
            return stats.to_json_dict()

    @app.get("/sessions/{sid}/histograms")
    def histograms(sid: str, bins: int | None = None):
        session = store.get(sid)
        with session.lock:
            matrix = _require_matrix(session)
            partition = _require_partition(session)
            _refresh(session)
            return {
                "features": feature_histograms(
                    matrix, partition, bins=bins or session.config.bins
                )
            }

    @app.post("/sessions/{sid}/subpopulations")
    def add_subpop(sid: str):
        session = store.get(sid)
        with session.lock:
            _require_matrix(session)
            partition = _require_partition(session)
            if not session.selection.indices:
                raise ApiError(409, "selection is empty; select instances first")
            session.partition = add_subpopulation(
                partition, session.selection, session.reduced.values
            )
            session.stale = True
            _refresh(session)
            new_group = session.partition.k - 1
            return {"group": new_group, "groups": session.partition.k}

    @app.delete("/sessions/{sid}/subpopulations/{gid}")
    def remove_subpop(sid: str, gid: int):
        session = store.get(sid)
        with session.lock:
            _require_matrix(session)
            partition = _require_partition(session)
            if not any(g.group_id == gid for g in partition.groups):
                raise ApiError(404, f"unknown group {gid}")
            if partition.k < 2:
                raise ApiError(409, "cannot remove the last group")
            session.partition = remove_subpopulation(partition, gid, session.reduced.values)
            session.stale = True
            _refresh(session)
            return {"groups": session.partition.k}

    @app.get("/sessions/{sid}/snapshot")
    def snapshot(sid: str):
        session = store.get(sid)
        with session.lock:
            out = {
                "session_id": session.session_id,
                "config": session.config.to_json_dict(),
                "selection": list(session.selection.indices),
            }
            if session.matrix is not None:
                out["matrix"] = session.matrix.to_json_dict()
            if session.partition is not None:
                out["partition"] = session.partition.to_json_dict()
            return out

    @app.get("/healthz")
    def health():
        return {"ok": True}

    return app


async def _json_body(request: Request, default=None):
    body = await request.body()
    if not body:
        if default is not None:
            return default
        raise ApiError(422, "request body required")
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ApiError(422, f"invalid JSON body: {exc}")


app = create_app()
