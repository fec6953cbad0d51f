"""HTTP facade over upload, descriptor inspection and recommendation.

The app keeps uploaded sets in an in-memory, LRU-bounded session store and
serves recommendations from one surrogate model loaded at startup.  All
endpoints live under ``/api``; static UI assets, when configured, are
mounted at ``/``.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from .harness import GridRanges, build_grid
from .recommend import TABLE_COLUMNS, ObjectiveSpec, build_table
from .seqcore import (
    DESCRIPTOR_STAT_COLUMNS,
    EmptyFileError,
    MalformedLineError,
    SequenceSet,
    SetDescriptor,
    compute_descriptor,
    parse_sequence_file,
)
from .surrogate import load_model

SCHEMA_VERSION = 1
DEFAULT_MAX_UPLOAD_BYTES = 1 << 20
DEFAULT_STORE_CAPACITY = 64
EVICTION_PROTECTION_SECONDS = 600.0


@dataclass
class SessionEntry:
    sset: SequenceSet
    descriptor: SetDescriptor
    uploaded_at: float


class SessionStore:
    """Thread-safe LRU map from opaque set ids to uploaded sets.

    Eviction only removes least-recently-used entries older than the
    protection window; while every entry is still protected the store
    temporarily grows past its capacity rather than dropping fresh uploads.
    """

    def __init__(self, capacity: int = DEFAULT_STORE_CAPACITY, clock=time.monotonic):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._clock = clock
        self._entries: OrderedDict[str, SessionEntry] = OrderedDict()
        self._lock = threading.Lock()

    def put(self, sset: SequenceSet, descriptor: SetDescriptor) -> str:
        set_id = uuid.uuid4().hex
        now = self._clock()
        with self._lock:
            self._entries[set_id] = SessionEntry(sset, descriptor, now)
            while len(self._entries) > self.capacity:
                oldest_id = next(iter(self._entries))
                if now - self._entries[oldest_id].uploaded_at < EVICTION_PROTECTION_SECONDS:
                    break
                del self._entries[oldest_id]
        return set_id

    def get(self, set_id: str) -> SessionEntry | None:
        with self._lock:
            entry = self._entries.get(set_id)
            if entry is not None:
                self._entries.move_to_end(set_id)
            return entry

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class GridOverride(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_per_dim: int = Field(default=3, ge=1, le=5)
    seed: int = 0


class RecommendationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    set_id: str
    objectives: list[str] = Field(min_length=1)
    grid: GridOverride | None = None
    show_all: bool = True


def _descriptor_json(descriptor: SetDescriptor) -> dict:
    stats = dict(zip(DESCRIPTOR_STAT_COLUMNS, descriptor.csv_values()))
    return {**stats, "ngram_freqs": dict(sorted(descriptor.ngram_freqs.items()))}


def create_app(
    model_path=None,
    store: SessionStore | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
    static_dir=None,
) -> FastAPI:
    app = FastAPI(title="tdcminer service")
    app.state.store = store if store is not None else SessionStore()
    app.state.model = None
    app.state.metadata = {}
    if model_path is not None:
        app.state.model, app.state.metadata = load_model(model_path)

    def model_info() -> dict:
        metadata = app.state.metadata
        return {
            "family": metadata.get("family", "general"),
            "corpus_hash": metadata.get("corpus_hash"),
        }

    @app.get("/api/health")
    def health():
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "ok",
            "model_loaded": app.state.model is not None,
            "corpus_hash": app.state.metadata.get("corpus_hash"),
        }

    @app.post("/api/sets", status_code=201)
    async def upload_set(request: Request):
        body = await request.body()
        if len(body) > max_upload_bytes:
            raise HTTPException(413, detail=f"upload exceeds {max_upload_bytes} bytes")
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise HTTPException(400, detail=f"body is not valid UTF-8: {exc}") from exc
        try:
            sset = parse_sequence_file(text, name="uploaded")
        except (EmptyFileError, MalformedLineError) as exc:
            raise HTTPException(400, detail=f"{type(exc).__name__}: {exc}") from exc
        descriptor = compute_descriptor(sset)
        set_id = app.state.store.put(sset, descriptor)
        return {
            "schema_version": SCHEMA_VERSION,
            "set_id": set_id,
            "descriptor": _descriptor_json(descriptor),
            "warnings": [],
        }

    @app.post("/api/recommendations")
    def recommendations(request: RecommendationRequest):
        if app.state.model is None:
            raise HTTPException(503, detail="no surrogate model is configured")
        entry = app.state.store.get(request.set_id)
        if entry is None:
            raise HTTPException(404, detail=f"unknown set_id {request.set_id!r}")
        try:
            spec = ObjectiveSpec.parse(",".join(request.objectives))
        except ValueError as exc:
            raise HTTPException(422, detail=f"objectives: {exc}") from exc
        override = request.grid if request.grid is not None else GridOverride()
        grid = build_grid(override.n_per_dim, GridRanges(), seed=override.seed)
        table = build_table(
            app.state.model,
            entry.descriptor,
            grid,
            spec,
            show_all=request.show_all,
            set_name=entry.sset.name,
        )
        rows = [
            {
                "params": {
                    "increment": row.params.increment,
                    "mutation_probability": list(row.params.mutation_probability),
                    "mutation_number": row.params.mutation_number,
                    "parent_fraction": row.params.parent_fraction,
                    "start_population_factor": row.params.start_population_factor,
                },
                "predicted": row.predicted,
                "nondominated": row.nondominated,
            }
            for row in table.rows
        ]
        scatter = None
        if table.scatter is not None:
            scatter = [[x, y, flag] for x, y, flag in table.scatter]
        return {
            "schema_version": SCHEMA_VERSION,
            "columns": list(TABLE_COLUMNS),
            "objectives": [list(pair) for pair in spec.objectives],
            "rows": rows,
            "scatter": scatter,
            "model_info": model_info(),
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
