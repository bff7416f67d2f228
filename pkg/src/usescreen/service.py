"""Stateless evaluation service plus file-backed worksheet and project storage.

Evaluation endpoints are pure: the same body yields the same bytes, and
nothing is stored. Worksheets and projects live as plain JSON files keyed
by id so an auditor can read the store directly. Gate mutations take a
per-project lock, which makes concurrent appends linearizable: one wins,
the other gets a conflict.

The service is a deployment-local tool for a committee workstation and
deliberately carries no authentication.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Mapping, Optional
from urllib.parse import parse_qs, urlparse

from . import analysis, scoring, stagegate
from .model import PROFILE_PRESETS, DecisionProfile, ReasonCode, StopCode
from .worksheet import (
    Worksheet,
    WorksheetError,
    canonical_json,
    export_report,
    load_format_reference,
    parse_sweep_spec,
    parse_worksheet,
    project_doc,
    project_from_doc,
    serialize_stability,
    serialize_worksheet,
    _profile_doc,
)

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")
_MAX_BODY = 5 * 1024 * 1024


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    store_dir: Path = Path("screening-store")
    strict: bool = True
    default_profile: str = "baseline"

    def __post_init__(self) -> None:
        self.store_dir = Path(self.store_dir)
        if self.default_profile not in PROFILE_PRESETS:
            raise ValueError(f"unknown default profile preset {self.default_profile!r}")


class _HTTPError(Exception):
    def __init__(self, status: int, errors: list[str]):
        self.status = status
        self.errors = errors
        super().__init__("; ".join(errors))


class ScreeningService:
    """Owns the HTTP server, the storage directory, and the per-project locks."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._prepare_store(config.store_dir)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        handler = _make_handler(self)
        self._server = ThreadingHTTPServer((config.host, config.port), handler)
        self._thread: Optional[threading.Thread] = None

    @staticmethod
    def _prepare_store(store_dir: Path) -> None:
        try:
            for sub in ("worksheets", "projects"):
                (store_dir / sub).mkdir(parents=True, exist_ok=True)
            probe = store_dir / ".write-probe"
            probe.write_text("ok", encoding="utf-8")
            probe.unlink()
        except OSError as exc:
            raise ValueError(f"storage directory {store_dir} is not writable: {exc}") from exc

    # -- lifecycle -----------------------------------------------------------

    @property
    def host(self) -> str:
        return self._server.server_address[0]

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def start(self) -> "ScreeningService":
        """Run in a background thread (used by tests and embedders)."""
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    # -- storage -------------------------------------------------------------

    def _path(self, kind: str, item_id: str) -> Path:
        if not _ID_RE.match(item_id):
            raise _HTTPError(400, [f"invalid id {item_id!r}"])
        return self.config.store_dir / kind / f"{item_id}.json"

    def _lock_for(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def load_worksheet(self, item_id: str) -> Worksheet:
        path = self._path("worksheets", item_id)
        if not path.exists():
            raise _HTTPError(404, [f"no stored worksheet {item_id!r}"])
        return parse_worksheet(path.read_text(encoding="utf-8"), strict=self.config.strict)

    def store_worksheet(self, item_id: str, worksheet: Worksheet) -> None:
        self._path("worksheets", item_id).write_text(
            serialize_worksheet(worksheet), encoding="utf-8"
        )

    def load_project(self, project_id: str) -> stagegate.Project:
        path = self._path("projects", project_id)
        if not path.exists():
            raise _HTTPError(404, [f"no stored project {project_id!r}"])
        return project_from_doc(json.loads(path.read_text(encoding="utf-8")))

    def store_project(self, project: stagegate.Project) -> None:
        self._path("projects", project.id).write_text(
            canonical_json(project_doc(project)), encoding="utf-8"
        )

    # -- request handling ------------------------------------------------------

    def handle(self, method: str, path: str, query: Mapping[str, list[str]],
               body: bytes) -> tuple[int, str]:
        """Route one request; returns (status, response text)."""
        parts = [part for part in path.split("/") if part]
        try:
            if method == "POST" and parts == ["evaluate"]:
                return self._evaluate(query, body)
            if method == "POST" and parts == ["sensitivity"]:
                return self._sensitivity(body)
            if method == "GET" and parts == ["formats"]:
                reference = load_format_reference()
                return 200, canonical_json(
                    {"formats": [vars(entry) for entry in reference.entries]}
                )
            if method == "GET" and parts == ["presets"]:
                return 200, canonical_json(
                    {name: _profile_doc(profile) for name, profile in PROFILE_PRESETS.items()}
                )
            if parts[:1] == ["worksheets"]:
                return self._worksheets(method, parts[1:], query, body)
            if parts[:1] == ["projects"]:
                return self._projects(method, parts[1:], body)
            raise _HTTPError(404, [f"no route for {method} /{'/'.join(parts)}"])
        except _HTTPError as exc:
            return exc.status, canonical_json({"errors": list(exc.errors)})
        except WorksheetError as exc:
            return 400, canonical_json({"errors": list(exc.diagnostics)})
        except (scoring.EvaluationError, analysis.SweepError) as exc:
            return 400, canonical_json({"errors": [str(exc)]})
        except stagegate.GateError as exc:
            return 409, canonical_json({"errors": [str(exc)]})

    # -- endpoint bodies -------------------------------------------------------

    def _effective_profile(self, worksheet: Worksheet,
                           query: Mapping[str, list[str]]) -> DecisionProfile:
        profile = worksheet.profile
        names = query.get("profile")
        if names:
            name = names[-1]
            if name not in PROFILE_PRESETS:
                raise _HTTPError(400, [f"unknown profile preset {name!r}"])
            profile = PROFILE_PRESETS[name]
        epsilons = query.get("epsilon")
        if epsilons:
            try:
                profile = profile.with_overrides(borderline_epsilon=float(epsilons[-1]))
            except ValueError as exc:
                raise _HTTPError(400, [f"epsilon: {exc}"])
        return profile

    def _evaluate(self, query: Mapping[str, list[str]], body: bytes) -> tuple[int, str]:
        worksheet = parse_worksheet(_decode(body), strict=self.config.strict)
        effective = worksheet.with_profile(self._effective_profile(worksheet, query))
        evaluation = scoring.evaluate(effective.evaluation_set(), effective.profile)
        return 200, export_report(effective, evaluation)

    def _sensitivity(self, body: bytes) -> tuple[int, str]:
        doc = _decode_json(body)
        if not isinstance(doc, dict) or "worksheet" not in doc or "sweep" not in doc:
            raise _HTTPError(400, ["body must carry 'worksheet' and 'sweep' objects"])
        worksheet = parse_worksheet(canonical_json(doc["worksheet"]),
                                    strict=self.config.strict)
        spec = parse_sweep_spec(canonical_json(doc["sweep"]), worksheet.profile)
        report = analysis.weight_sweep(worksheet.evaluation_set(), spec)
        return 200, serialize_stability(report)

    def _worksheets(self, method: str, rest: list[str],
                    query: Mapping[str, list[str]], body: bytes) -> tuple[int, str]:
        if method == "GET" and not rest:
            ids = sorted(
                path.stem for path in (self.config.store_dir / "worksheets").glob("*.json")
            )
            return 200, canonical_json({"ids": ids})
        if method == "POST" and not rest:
            worksheet = parse_worksheet(_decode(body), strict=self.config.strict)
            item_id = (query.get("id") or [uuid.uuid4().hex[:12]])[-1]
            path = self._path("worksheets", item_id)
            if path.exists():
                raise _HTTPError(409, [f"worksheet {item_id!r} already exists; use PUT"])
            self.store_worksheet(item_id, worksheet)
            return 201, canonical_json({"id": item_id})
        if len(rest) == 1:
            if method == "GET":
                return 200, serialize_worksheet(self.load_worksheet(rest[0]))
            if method == "PUT":
                worksheet = parse_worksheet(_decode(body), strict=self.config.strict)
                if not self._path("worksheets", rest[0]).exists():
                    raise _HTTPError(404, [f"no stored worksheet {rest[0]!r}"])
                self.store_worksheet(rest[0], worksheet)
                return 200, canonical_json({"id": rest[0]})
        raise _HTTPError(404, ["no such worksheet route"])

    def _projects(self, method: str, rest: list[str], body: bytes) -> tuple[int, str]:
        if method == "POST" and not rest:
            doc = _decode_json(body)
            if not isinstance(doc, dict):
                raise _HTTPError(400, ["body must be an object"])
            if "worksheet_id" in doc:
                worksheet = self.load_worksheet(str(doc["worksheet_id"]))
            elif "worksheet" in doc:
                worksheet = parse_worksheet(canonical_json(doc["worksheet"]),
                                            strict=self.config.strict)
            else:
                raise _HTTPError(400, ["body must carry 'worksheet' or 'worksheet_id'"])
            project_id = str(doc.get("id") or f"prj-{uuid.uuid4().hex[:10]}")
            if not _ID_RE.match(project_id):
                raise _HTTPError(400, [f"invalid id {project_id!r}"])
            if self._path("projects", project_id).exists():
                raise _HTTPError(409, [f"project {project_id!r} already exists"])
            project = stagegate.open_project(worksheet.asset, worksheet.uses, id=project_id)
            self.store_project(project)
            return 201, canonical_json(project_doc(project))

        if len(rest) == 1 and method == "GET":
            return 200, canonical_json(project_doc(self.load_project(rest[0])))

        if len(rest) == 2 and method == "POST" and rest[1] == "gates":
            return self._append_gate(rest[0], _decode_json(body))

        if len(rest) == 2 and method == "POST" and rest[1] == "evaluation":
            return self._attach_evaluation(rest[0], body)

        raise _HTTPError(404, ["no such project route"])

    def _append_gate(self, project_id: str, doc: Any) -> tuple[int, str]:
        if not isinstance(doc, dict) or "stage" not in doc:
            raise _HTTPError(400, ["gate body must carry at least 'stage'"])
        try:
            stage = stagegate.Stage(doc["stage"])
        except ValueError:
            stages = ", ".join(stage.value for stage in stagegate.STAGE_ORDER)
            raise _HTTPError(400, [f"stage must be one of: {stages}"])
        checklist = doc.get("checklist", {})
        if not isinstance(checklist, dict) or not all(
            isinstance(value, bool) for value in checklist.values()
        ):
            raise _HTTPError(400, ["checklist must map check ids to booleans"])
        reasons = []
        for i, entry in enumerate(doc.get("reasons", [])):
            try:
                reasons.append(ReasonCode(code=StopCode(entry["code"]), detail=entry["detail"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise _HTTPError(400, [f"reasons[{i}]: {exc}"])
        assumptions = doc.get("assumptions", [])
        if not isinstance(assumptions, list):
            raise _HTTPError(400, ["assumptions must be an array of text"])

        with self._lock_for(project_id):
            project = self.load_project(project_id)
            timestamp = doc.get("timestamp")
            if timestamp is None:
                timestamp = (project.gate_history[-1].timestamp + 1
                             if project.gate_history else 1)
            project.record_gate(
                stage, checklist, reasons,
                timestamp=timestamp, assumptions=[str(a) for a in assumptions],
            )
            self.store_project(project)
            return 201, canonical_json(project_doc(project))

    def _attach_evaluation(self, project_id: str, body: bytes) -> tuple[int, str]:
        worksheet = parse_worksheet(_decode(body), strict=self.config.strict)
        evaluation = scoring.evaluate(worksheet.evaluation_set(), worksheet.profile)
        with self._lock_for(project_id):
            project = self.load_project(project_id)
            timestamp = (project.gate_history[-1].timestamp + 1
                         if project.gate_history else 1)
            project.attach_evaluation(evaluation.results, timestamp=timestamp)
            self.store_project(project)
            return 200, canonical_json(project_doc(project))


def _decode(body: bytes) -> str:
    try:
        return body.decode("utf-8")
    except UnicodeDecodeError:
        raise _HTTPError(400, ["body must be UTF-8 text"])


def _decode_json(body: bytes) -> Any:
    try:
        return json.loads(_decode(body))
    except json.JSONDecodeError as exc:
        raise _HTTPError(400, [f"invalid JSON body ({exc.msg} at line {exc.lineno})"])


def _make_handler(service: ScreeningService) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format: str, *args: Any) -> None:  # noqa: A002
            pass  # quiet by default; the store is the audit trail

        def _respond(self, status: int, text: str) -> None:
            payload = text.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(payload)

        def _read_body(self) -> Optional[bytes]:
            length = int(self.headers.get("Content-Length") or 0)
            if length > _MAX_BODY:
                self._respond(413, canonical_json({"errors": ["body too large"]}))
                return None
            return self.rfile.read(length) if length else b""

        def _dispatch(self, method: str) -> None:
            body = self._read_body()
            if body is None:
                return
            url = urlparse(self.path)
            status, text = service.handle(method, url.path, parse_qs(url.query), body)
            self._respond(status, text)

        def do_GET(self) -> None:
            self._dispatch("GET")

        def do_POST(self) -> None:
            self._dispatch("POST")

        def do_PUT(self) -> None:
            self._dispatch("PUT")

        def do_OPTIONS(self) -> None:
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

    return Handler


def serve(config: ServiceConfig) -> ScreeningService:
    """Construct and start a service in a background thread."""
    return ScreeningService(config).start()
