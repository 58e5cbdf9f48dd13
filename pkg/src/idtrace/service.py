"""HTTP facade for interactive tracing sessions.

JSON over HTTP under /v1. Datasets are registered by content digest
(uploading the same CSV twice returns the existing record); sessions are
persisted as append-only observation logs plus periodic snapshots, so any
session can be rebuilt from disk. Per-session mutations are serialized
through an optimistic revision check; everything else is lock-free reads
of immutable universes.

The server is authoritative for every number the UI shows: entropy values
are emitted both as JSON numbers (shortest round-trip decimal) and as hex
float strings so clients can compare bit-for-bit without re-deriving.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .entropy import ObservationSet
from .errors import CsvFormatError, IdTraceError
from .tracing import (
    SessionState,
    SessionStatus,
    observe,
    recommend_next,
    start_session,
    whatif,
)
from .universe import MISSING, Observation, Universe, load_csv_text

#: snapshot every N mutations (the log stays authoritative)
SNAPSHOT_EVERY = 5


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _bits_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _bits_hex(value: float) -> str | None:
    return value.hex() if math.isfinite(value) else None


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _error_response(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


# --------------------------------------------------------------------------
# Persistence


@dataclass
class DatasetEntry:
    record: dict
    universe: Universe


@dataclass
class SessionEntry:
    session_id: str
    dataset_id: str
    state: SessionState
    revision: int = 0
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)
    lock: threading.Lock = field(default_factory=threading.Lock)


class Store:
    """Disk-backed registry of datasets and sessions."""

    def __init__(self, data_dir):
        self.root = Path(data_dir)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._datasets: dict[str, DatasetEntry] = {}
        self._sessions: dict[str, SessionEntry] = {}
        self._registry_lock = threading.Lock()
        self._load_existing()

    # -- datasets --------------------------------------------------------

    def _dataset_dir(self, dataset_id: str) -> Path:
        return self.root / "datasets" / dataset_id

    def _load_existing(self) -> None:
        for record_path in sorted(self.root.glob("datasets/*/record.json")):
            record = json.loads(record_path.read_text())
            csv_path = record_path.parent / "source.csv"
            universe = load_csv_text(csv_path.read_text())
            self._datasets[record["dataset_id"]] = DatasetEntry(record, universe)
        for log_path in sorted(self.root.glob("sessions/*.jsonl")):
            entry = self._replay_log(log_path)
            if entry is not None:
                self._sessions[entry.session_id] = entry

    def add_dataset(self, csv_body: str, name: str) -> dict:
        universe = load_csv_text(csv_body)
        digest = universe.digest()
        dataset_id = digest[:16]
        with self._registry_lock:
            existing = self._datasets.get(dataset_id)
            if existing is not None:
                return existing.record
            record = {
                "dataset_id": dataset_id,
                "name": name,
                "digest": digest,
                "n_objects": universe.n_objects,
                "n_attributes": universe.n_attributes,
                "created_at": _now(),
                "attributes": [
                    {"name": a.name, "values": list(a.values)}
                    for a in universe.schema
                ],
            }
            ddir = self._dataset_dir(dataset_id)
            ddir.mkdir(parents=True, exist_ok=True)
            (ddir / "source.csv").write_text(csv_body)
            (ddir / "record.json").write_text(json.dumps(record, indent=2))
            self._datasets[dataset_id] = DatasetEntry(record, universe)
            return record

    def dataset(self, dataset_id: str) -> DatasetEntry:
        entry = self._datasets.get(dataset_id)
        if entry is None:
            raise ApiError(404, "not_found", f"no dataset {dataset_id!r}")
        return entry

    def list_datasets(self) -> list[dict]:
        return [e.record for e in self._datasets.values()]

    # -- sessions --------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.jsonl"

    def _snapshot_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.snapshot.json"

    def _append_log(self, session_id: str, event: dict) -> None:
        with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def _write_snapshot(self, entry: SessionEntry) -> None:
        universe = self.dataset(entry.dataset_id).universe
        snapshot = {
            "session_id": entry.session_id,
            "dataset_id": entry.dataset_id,
            "revision": entry.revision,
            "status": entry.state.status.value,
            "candidate_count": entry.state.candidates.size,
            "known": _known_payload(universe, entry.state.known),
            "path": [
                {
                    "attribute": universe.schema[o.attribute_id].name,
                    "value": universe.schema[o.attribute_id].values[o.value],
                }
                for o in entry.state.path
            ],
            "updated_at": entry.updated_at,
        }
        self._snapshot_path(entry.session_id).write_text(
            json.dumps(snapshot, indent=2)
        )

    def _replay_log(self, log_path: Path) -> SessionEntry | None:
        lines = [
            json.loads(line)
            for line in log_path.read_text().splitlines()
            if line.strip()
        ]
        if not lines or lines[0].get("event") != "create":
            return None
        head = lines[0]
        dataset = self._datasets.get(head["dataset_id"])
        if dataset is None:
            return None
        universe = dataset.universe
        known = _parse_known(universe, head.get("known", {}))
        state = start_session(universe, known)
        revision = 0
        for event in lines[1:]:
            if event.get("event") != "observe":
                continue
            attr = universe.schema.by_name(event["attribute"])
            observe(state, Observation(attr.attribute_id, attr.code_of(event["value"])))
            revision += 1
        return SessionEntry(
            session_id=head["session_id"],
            dataset_id=head["dataset_id"],
            state=state,
            revision=revision,
            created_at=head.get("created_at", _now()),
            updated_at=lines[-1].get("at", head.get("created_at", _now())),
        )

    def create_session(self, dataset_id: str, known_labels: dict[str, str]) -> SessionEntry:
        dataset = self.dataset(dataset_id)
        known = _parse_known(dataset.universe, known_labels)
        state = start_session(dataset.universe, known)
        session_id = uuid.uuid4().hex[:16]
        now = _now()
        entry = SessionEntry(
            session_id=session_id,
            dataset_id=dataset_id,
            state=state,
            created_at=now,
            updated_at=now,
        )
        with self._registry_lock:
            self._sessions[session_id] = entry
        self._append_log(
            session_id,
            {
                "event": "create",
                "session_id": session_id,
                "dataset_id": dataset_id,
                "known": dict(known_labels),
                "created_at": entry.created_at,
            },
        )
        self._write_snapshot(entry)
        return entry

    def session(self, session_id: str) -> SessionEntry:
        entry = self._sessions.get(session_id)
        if entry is None:
            raise ApiError(404, "not_found", f"no session {session_id!r}")
        return entry

    def list_sessions(self, dataset_id: str | None = None) -> list[SessionEntry]:
        entries = list(self._sessions.values())
        if dataset_id is not None:
            entries = [e for e in entries if e.dataset_id == dataset_id]
        return entries

    def delete_session(self, session_id: str) -> None:
        self.session(session_id)  # 404 when absent
        with self._registry_lock:
            self._sessions.pop(session_id, None)
        self._log_path(session_id).unlink(missing_ok=True)
        self._snapshot_path(session_id).unlink(missing_ok=True)

    def apply_observation(
        self, session_id: str, attribute: str, value: str, expected_revision: int
    ) -> SessionEntry:
        entry = self.session(session_id)
        universe = self.dataset(entry.dataset_id).universe
        with entry.lock:
            if entry.revision != expected_revision:
                raise ApiError(
                    409,
                    "revision_conflict",
                    f"session is at revision {entry.revision}, "
                    f"not {expected_revision}",
                    detail={"revision": entry.revision},
                )
            attr = universe.schema.by_name(attribute)
            obs = Observation(attr.attribute_id, attr.code_of(value))
            observe(entry.state, obs)
            entry.revision += 1
            entry.updated_at = _now()
            self._append_log(
                session_id,
                {
                    "event": "observe",
                    "attribute": attribute,
                    "value": value,
                    "at": entry.updated_at,
                },
            )
            if entry.revision % SNAPSHOT_EVERY == 0:
                self._write_snapshot(entry)
        return entry


def _parse_known(universe: Universe, labels: dict[str, str]) -> ObservationSet:
    observations = []
    for name, label in labels.items():
        attr = universe.schema.by_name(name)
        observations.append(Observation(attr.attribute_id, attr.code_of(str(label))))
    return ObservationSet(tuple(observations))


def _known_payload(universe: Universe, known: ObservationSet) -> dict[str, str]:
    return {
        universe.schema[o.attribute_id].name: universe.schema[o.attribute_id].values[
            o.value
        ]
        for o in known
    }


# --------------------------------------------------------------------------
# Payload shaping


def session_payload(
    entry: SessionEntry, universe: Universe, display_threshold: int
) -> dict:
    state = entry.state
    entropy = state.entropy_history[-1]
    payload = {
        "session_id": entry.session_id,
        "dataset_id": entry.dataset_id,
        "revision": entry.revision,
        "status": state.status.value,
        "candidate_count": state.candidates.size,
        "entropy_bits": _bits_or_none(entropy),
        "entropy_bits_hex": _bits_hex(entropy),
        "known": _known_payload(universe, state.known),
        "path": [
            {
                "attribute": universe.schema[o.attribute_id].name,
                "value": universe.schema[o.attribute_id].values[o.value],
                "entropy_after": _bits_or_none(state.entropy_history[i + 1]),
            }
            for i, o in enumerate(state.path)
        ],
        "entropy_history": [_bits_or_none(h) for h in state.entropy_history],
        "created_at": entry.created_at,
        "updated_at": entry.updated_at,
    }
    if state.status is SessionStatus.IDENTIFIED:
        payload["identified_object"] = state.survivor_ids()[0]
    if 0 < state.candidates.size <= display_threshold:
        payload["survivors"] = _survivor_rows(universe, state)
    return payload


def _survivor_rows(universe: Universe, state: SessionState) -> list[dict]:
    rows = []
    for idx in state.candidates.indices():
        idx = int(idx)
        cells = {}
        for attr in universe.schema:
            code = universe.value_of(idx, attr.attribute_id)
            cells[attr.name] = None if code == MISSING else attr.values[code]
        rows.append({"object_id": universe.object_ids[idx], "values": cells})
    return rows


# --------------------------------------------------------------------------
# App


class CreateSessionBody(BaseModel):
    dataset_id: str
    known: dict[str, str] = {}


class ObservationBody(BaseModel):
    attribute: str
    value: str
    expected_revision: int


def create_app(data_dir, display_threshold: int = 50, ui_dir=None) -> FastAPI:
    """Build the service around one data directory."""
    app = FastAPI(title="idtrace", version="1")
    store = Store(data_dir)
    app.state.store = store
    app.state.display_threshold = display_threshold

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(IdTraceError)
    async def _domain_error(request: Request, exc: IdTraceError):
        status = 400
        detail = None
        if isinstance(exc, CsvFormatError) and exc.row is not None:
            detail = {"row": exc.row}
        return _error_response(status, exc.code, str(exc), detail)

    # -- datasets --------------------------------------------------------

    @app.post("/v1/datasets", status_code=201)
    async def upload_dataset(request: Request, name: str = Query(default="dataset")):
        body = (await request.body()).decode("utf-8")
        record = store.add_dataset(body, name)
        return record

    @app.get("/v1/datasets")
    def list_datasets():
        return {"datasets": store.list_datasets()}

    @app.get("/v1/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        return store.dataset(dataset_id).record

    # -- sessions --------------------------------------------------------

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        entry = store.create_session(body.dataset_id, body.known)
        universe = store.dataset(entry.dataset_id).universe
        return session_payload(entry, universe, display_threshold)

    @app.get("/v1/sessions")
    def list_sessions(dataset_id: str | None = None):
        out = []
        for entry in store.list_sessions(dataset_id):
            out.append(
                {
                    "session_id": entry.session_id,
                    "dataset_id": entry.dataset_id,
                    "revision": entry.revision,
                    "status": entry.state.status.value,
                    "candidate_count": entry.state.candidates.size,
                    "updated_at": entry.updated_at,
                }
            )
        return {"sessions": out}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        entry = store.session(session_id)
        universe = store.dataset(entry.dataset_id).universe
        return session_payload(entry, universe, display_threshold)

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.delete_session(session_id)

    @app.get("/v1/sessions/{session_id}/recommendations")
    def get_recommendations(session_id: str, top: int = Query(default=5, ge=1)):
        entry = store.session(session_id)
        universe = store.dataset(entry.dataset_id).universe
        if entry.state.status is not SessionStatus.ACTIVE:
            raise ApiError(
                409,
                "session_terminal",
                f"session is {entry.state.status.value}; nothing to recommend",
            )
        rec = recommend_next(entry.state)
        ranking = []
        for attribute_id, bits in rec.ranking[:top]:
            attr = universe.schema[attribute_id]
            preview = whatif(entry.state, attribute_id)
            ranking.append(
                {
                    "attribute": attr.name,
                    "bits": bits,
                    "bits_hex": _bits_hex(bits),
                    "whatif": {
                        attr.values[value]: count
                        for value, (count, _) in sorted(preview.items())
                    },
                }
            )
        return {
            "session_id": session_id,
            "revision": entry.revision,
            "chosen": universe.schema[rec.chosen].name,
            "ranking": ranking,
        }

    @app.post("/v1/sessions/{session_id}/observations")
    def post_observation(session_id: str, body: ObservationBody):
        entry = store.session(session_id)
        universe = store.dataset(entry.dataset_id).universe
        if entry.state.status is not SessionStatus.ACTIVE:
            raise ApiError(
                409,
                "session_terminal",
                f"session is {entry.state.status.value}; no more observations",
            )
        entry = store.apply_observation(
            session_id, body.attribute, body.value, body.expected_revision
        )
        return session_payload(entry, universe, display_threshold)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
