"""HTTP session service for interactive threshold selection.

One session wraps one SdcPipeline; the browser (or any scripted client) pulls
the pending dimension's decision graph, posts boundaries, and repeats until
the run finishes. Sessions live in memory, are evicted after an idle TTL, and
serialize their request handling on a per-session lock.
"""
from __future__ import annotations

import json
import logging
import mimetypes
import os
import re
import secrets
import tempfile
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .dataset import DatasetError, MissingDataset, load_csv
from .partition import SdcPipeline, Thresholds

log = logging.getLogger("sdc.service")

DEFAULT_TTL_SECONDS = 3600.0


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Session:
    """Pipeline state machine plus housekeeping for one analysis session."""

    session_id: str
    pipeline: SdcPipeline
    lock: threading.Lock = field(default_factory=threading.Lock)
    touched: float = field(default_factory=time.monotonic)
    aborted: bool = False

    @property
    def status(self) -> str:
        if self.aborted:
            return "aborted"
        return "finished" if self.pipeline.finished else "awaiting_thresholds"

    def touch(self):
        self.touched = time.monotonic()


class SessionStore:
    """Threadsafe in-memory session registry with lazy TTL eviction."""

    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def _evict_idle(self):
        now = time.monotonic()
        for sid in [s for s, sess in self._sessions.items()
                    if now - sess.touched > self.ttl]:
            del self._sessions[sid]

    def create(self, ds: MissingDataset, *, normalize: bool = True,
               enhance: bool = True) -> Session:
        pipeline = SdcPipeline(ds, normalize=normalize, enhance=enhance)
        session = Session(secrets.token_hex(16), pipeline)
        with self._lock:
            self._evict_idle()
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._evict_idle()
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id}")
        session.touch()
        return session

    def remove(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id}")
        session.aborted = True
        return session


def _parse_multipart(content_type: str, body: bytes) -> dict[str, bytes]:
    """Minimal multipart/form-data fields parser (name -> payload)."""
    match = re.search(r'boundary="?([^";]+)"?', content_type)
    if not match:
        raise ServiceError(400, "multipart body without boundary")
    boundary = match.group(1).encode()
    fields: dict[str, bytes] = {}
    for part in body.split(b"--" + boundary):
        part = part.strip(b"\r\n")
        if not part or part == b"--":
            continue
        if b"\r\n\r\n" not in part:
            continue
        head, _, payload = part.partition(b"\r\n\r\n")
        disp = re.search(rb'name="([^"]*)"', head)
        if disp:
            fields[disp.group(1).decode("utf-8", "replace")] = payload
    return fields


def _bool_field(fields: dict[str, bytes], name: str, default: bool) -> bool:
    raw = fields.get(name)
    if raw is None:
        return default
    text = raw.decode("utf-8", "replace").strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ServiceError(400, f"bad boolean field {name}: {text!r}")


def graph_payload(session: Session) -> dict:
    pipe = session.pipeline
    if pipe.finished:
        raise ServiceError(409, "session already finished")
    graph = pipe.current_graph()
    points = [] if graph is None else graph.to_records()
    return {
        "sessionId": session.session_id,
        "dimIndex": pipe.pending_dim,
        "dimCount": pipe.dim_count,
        "clusterCountSoFar": pipe.fused_cluster_count(),
        "points": points,
    }


def submit_thresholds(session: Session, payload: dict) -> dict:
    pipe = session.pipeline
    if pipe.finished:
        raise ServiceError(409, "session already finished")
    if not isinstance(payload, dict):
        raise ServiceError(400, "body must be a JSON object")
    wanted = payload.get("dimIndex")
    if wanted is not None and wanted != pipe.pending_dim:
        raise ServiceError(409, f"dim {pipe.pending_dim} is pending, got thresholds "
                                f"for dim {wanted}")
    raw = payload.get("boundaries", [])
    if not isinstance(raw, list) or not all(isinstance(b, (int, float)) for b in raw):
        raise ServiceError(400, "boundaries must be a list of numbers")
    if any(b2 <= b1 for b1, b2 in zip(raw, raw[1:])):
        raise ServiceError(400, "boundaries must be strictly increasing")
    summary = pipe.submit(Thresholds(pipe.pending_dim, tuple(float(b) for b in raw)))
    return {
        "dimIndex": summary.dim_index,
        "fusionClusterSizes": summary.fusion_cluster_sizes,
        "finished": summary.finished,
    }


def result_payload(session: Session) -> dict:
    pipe = session.pipeline
    if not pipe.finished:
        raise ServiceError(409, "session has dimensions pending")
    partition = pipe.result()
    return {
        "finished": True,
        "clusterCount": partition.cluster_count,
        "labels": [
            {"objectId": oid, "clusterId": partition.assignments[oid]}
            for oid in sorted(partition.assignments)
        ],
    }


class SdcRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "sdc"
    store: SessionStore = None  # set by make_server
    static_dir: Optional[str] = None

    # -- plumbing ---------------------------------------------------------
    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send_json(self, status: int, payload: dict):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length) if length else b""

    def _session(self, session_id: str) -> Session:
        return self.store.get(session_id)

    def _route(self):
        return self.path.split("?", 1)[0].rstrip("/")

    # -- handlers ---------------------------------------------------------
    def do_POST(self):
        try:
            path = self._route()
            if path == "/sessions":
                self._create_session()
                return
            match = re.fullmatch(r"/sessions/([0-9a-f]+)/thresholds", path)
            if match:
                session = self._session(match.group(1))
                body = self._read_body()
                try:
                    payload = json.loads(body.decode("utf-8")) if body else {}
                except json.JSONDecodeError:
                    raise ServiceError(400, "invalid JSON body") from None
                with session.lock:
                    self._send_json(200, submit_thresholds(session, payload))
                return
            raise ServiceError(404, f"no such endpoint {path}")
        except ServiceError as err:
            self._send_json(err.status, {"error": err.message})
        except Exception:  # pragma: no cover - defensive
            log.exception("unhandled service error")
            self._send_json(500, {"error": "internal error"})

    def _create_session(self):
        content_type = self.headers.get("Content-Type", "")
        body = self._read_body()
        if not content_type.startswith("multipart/form-data"):
            raise ServiceError(400, "expected multipart/form-data upload")
        fields = _parse_multipart(content_type, body)
        csv_bytes = fields.get("file")
        if csv_bytes is None:
            raise ServiceError(400, "missing 'file' field")
        marker = fields.get("missingMarker", b"").decode("utf-8")
        label_column = fields.get("labelColumn")
        has_header = _bool_field(fields, "header", False)
        normalize = _bool_field(fields, "normalize", True)
        enhance = _bool_field(fields, "enhance", True)
        tmp = tempfile.NamedTemporaryFile("wb", suffix=".csv", delete=False)
        try:
            tmp.write(csv_bytes)
            tmp.close()
            ds = load_csv(
                tmp.name,
                missing_marker=marker,
                label_column=label_column.decode("utf-8") if label_column else None,
                has_header=has_header,
            )
        except DatasetError as err:
            raise ServiceError(400, str(err)) from None
        finally:
            os.unlink(tmp.name)
        session = self.store.create(ds, normalize=normalize, enhance=enhance)
        log.info("session %s created: %d objects, %d dims",
                 session.session_id, ds.object_count, ds.dim_count)
        self._send_json(201, {"sessionId": session.session_id,
                              "dimCount": session.pipeline.dim_count})

    def do_GET(self):
        try:
            path = self._route()
            match = re.fullmatch(r"/sessions/([0-9a-f]+)/graph", path)
            if match:
                session = self._session(match.group(1))
                with session.lock:
                    self._send_json(200, graph_payload(session))
                return
            match = re.fullmatch(r"/sessions/([0-9a-f]+)/result", path)
            if match:
                session = self._session(match.group(1))
                with session.lock:
                    self._send_json(200, result_payload(session))
                return
            if self.static_dir is not None:
                self._serve_static(path)
                return
            raise ServiceError(404, f"no such endpoint {path}")
        except ServiceError as err:
            self._send_json(err.status, {"error": err.message})
        except Exception:  # pragma: no cover - defensive
            log.exception("unhandled service error")
            self._send_json(500, {"error": "internal error"})

    def do_DELETE(self):
        try:
            match = re.fullmatch(r"/sessions/([0-9a-f]+)", self._route())
            if not match:
                raise ServiceError(404, f"no such endpoint {self.path}")
            self.store.remove(match.group(1))
            self._send_json(200, {"aborted": True})
        except ServiceError as err:
            self._send_json(err.status, {"error": err.message})

    def _serve_static(self, path: str):
        rel = path.lstrip("/") or "index.html"
        root = os.path.realpath(self.static_dir)
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(root + os.sep) and full != root:
            raise ServiceError(404, "not found")
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            raise ServiceError(404, f"no such file {rel}")
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(port: int = 0, static_dir: Optional[str] = None,
                ttl_seconds: float = DEFAULT_TTL_SECONDS) -> ThreadingHTTPServer:
    """Build (but do not start) the threaded HTTP server."""
    handler = type("BoundHandler", (SdcRequestHandler,), {
        "store": SessionStore(ttl_seconds),
        "static_dir": static_dir,
    })
    return ThreadingHTTPServer(("127.0.0.1", port), handler)
