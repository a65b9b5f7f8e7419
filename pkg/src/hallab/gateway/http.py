"""HTTP/JSON API over the session manager.

Bodies are UTF-8 JSON; errors come back as {"error": {"code", "message"}}.
Event reads are cursor-based with an optional long-poll timeout. When a
console directory is configured, its static files are served at /.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import re
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from ..engine import ConflictError, EngineError
from ..kb import DocumentError, MemorizeError
from ..models import ScriptedModelMismatch
from ..scenarios import ScenarioError, list_bundles
from ..virtlab.datasets import DatasetError, MissingDatasetError, load_dataset
from .manager import SessionManager, UnknownSessionError

logger = logging.getLogger(__name__)

MAX_BODY = 8 * 1024 * 1024
MAX_POLL_MS = 30_000


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


_ROUTES = [
    ("POST", re.compile(r"^/api/sessions$"), "create_session"),
    ("GET", re.compile(r"^/api/sessions$"), "list_sessions"),
    ("POST", re.compile(r"^/api/sessions/([^/]+)/input$"), "post_input"),
    ("GET", re.compile(r"^/api/sessions/([^/]+)/events$"), "get_events"),
    ("GET", re.compile(r"^/api/sessions/([^/]+)/state$"), "get_state"),
    ("GET", re.compile(r"^/api/sessions/([^/]+)/report$"), "get_report"),
    ("POST", re.compile(r"^/api/sessions/([^/]+)/steps/(\d+)/approve$"),
     "approve"),
    ("POST", re.compile(r"^/api/sessions/([^/]+)/steps/(\d+)/memorize$"),
     "memorize"),
    ("GET", re.compile(r"^/api/kb/docs$"), "list_docs"),
    ("POST", re.compile(r"^/api/kb/docs$"), "add_doc"),
    ("POST", re.compile(r"^/api/kb/search$"), "search_kb"),
    ("GET", re.compile(r"^/api/datasets$"), "get_dataset"),
    ("GET", re.compile(r"^/api/scenarios$"), "get_scenarios"),
]


class GatewayHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    # -- plumbing -------------------------------------------------------------

    def log_message(self, fmt, *args):
        logger.debug("gateway: " + fmt, *args)

    @property
    def manager(self) -> SessionManager:
        return self.server.manager

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            raise ApiError(413, "too_large", "request body too large")
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "bad_json", f"body is not JSON: {exc}")
        if not isinstance(obj, dict):
            raise ApiError(400, "bad_json", "body must be a JSON object")
        return obj

    def _send(self, status: int, payload: dict):
        data = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str):
        parsed = urllib.parse.urlparse(self.path)
        self.query = urllib.parse.parse_qs(parsed.query)
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(parsed.path)
            if match:
                try:
                    getattr(self, "h_" + name)(*match.groups())
                except ApiError as exc:
                    self._send(exc.status,
                               {"error": {"code": exc.code,
                                          "message": exc.message}})
                except UnknownSessionError as exc:
                    self._send(404, {"error": {"code": "not_found",
                                               "message": f"no session {exc}"}})
                except ConflictError as exc:
                    self._send(409, {"error": {"code": "conflict",
                                               "message": str(exc)}})
                except MissingDatasetError as exc:
                    self._send(404, {"error": {"code": "not_found",
                                               "message": str(exc)}})
                except (ValueError, ScenarioError, EngineError, DocumentError,
                        MemorizeError, DatasetError) as exc:
                    self._send(400, {"error": {"code": "bad_request",
                                               "message": str(exc)}})
                except ScriptedModelMismatch as exc:
                    self._send(500, {"error": {"code": "transcript_mismatch",
                                               "message": str(exc)}})
                except Exception as exc:  # noqa: BLE001 - boundary
                    logger.exception("gateway handler failed")
                    self._send(500, {"error": {"code": "internal",
                                               "message": str(exc)}})
                return
        if method == "GET" and self._serve_static(parsed.path):
            return
        self._send(404, {"error": {"code": "not_found",
                                   "message": f"no route {parsed.path}"}})

    def do_GET(self):  # noqa: N802
        self._dispatch("GET")

    def do_POST(self):  # noqa: N802
        self._dispatch("POST")

    def _qint(self, name: str, default: int) -> int:
        try:
            return int(self.query.get(name, [default])[0])
        except ValueError:
            raise ApiError(400, "bad_request", f"{name} must be an integer")

    # -- handlers ---------------------------------------------------------------

    def h_create_session(self):
        body = self._body()
        session_id = self.manager.create_session(
            mode=body.get("mode", "auto"),
            model_ref=body.get("model_ref", ""),
            lab_endpoint=body.get("lab_endpoint"),
            seed=int(body.get("seed", 0)),
        )
        self._send(201, {"id": session_id})

    def h_list_sessions(self):
        self._send(200, {"sessions": self.manager.list_sessions()})

    def h_post_input(self, session_id):
        body = self._body()
        text = body.get("text", "")
        self._send(200, self.manager.post_input(session_id, text))

    def h_get_events(self, session_id):
        since = self._qint("since", 0)
        timeout_ms = min(self._qint("timeout_ms", 0), MAX_POLL_MS)
        events = self.manager.events(session_id, since, timeout_ms)
        self._send(200, {"events": [e.as_dict() for e in events]})

    def h_get_state(self, session_id):
        self._send(200, {"state": self.manager.state(session_id)})

    def h_get_report(self, session_id):
        self._send(200, self.manager.report(session_id))

    def h_approve(self, session_id, cycle_index):
        self._send(200, self.manager.approve(session_id, int(cycle_index)))

    def h_memorize(self, session_id, cycle_index):
        body = self._body()
        title = body.get("title") or f"Example from {session_id}"
        doc_id = self.manager.memorize_step(session_id, int(cycle_index),
                                            title)
        self._send(201, {"doc_id": doc_id})

    def h_list_docs(self):
        docs = [{"id": d.id, "title": d.title, "kind": d.kind,
                 "refs": list(d.refs)} for d in self.manager.kb.documents()]
        self._send(200, {"docs": sorted(docs, key=lambda d: d["id"])})

    def h_add_doc(self):
        body = self._body()
        for key in ("id", "title", "kind", "body"):
            if not body.get(key):
                raise ApiError(400, "bad_request", f"missing field {key!r}")
        doc_id = self.manager.kb.add_document(
            body["id"], body["title"], body["kind"], body["body"],
            body.get("refs", []))
        self._send(201, {"id": doc_id})

    def h_search_kb(self):
        body = self._body()
        task = body.get("task", "")
        if not task.strip():
            raise ApiError(400, "bad_request", "missing task")
        k = int(body.get("k", 4))
        results = []
        for doc_id, score in self.manager.kb.search_text(task, k):
            doc = self.manager.kb.get(doc_id)
            results.append({"id": doc_id, "score": score,
                            "title": doc.title, "kind": doc.kind})
        self._send(200, {"results": results})

    def h_get_dataset(self):
        rel = self.query.get("path", [""])[0]
        root = self.manager.storage.root.resolve()
        path = (root / rel).resolve()
        if not rel or not str(path).startswith(str(root)):
            raise ApiError(400, "bad_request", "path must be storage-relative")
        ds = load_dataset(path)
        self._send(200, {"meta": ds.meta, "columns": ds.columns})

    def h_get_scenarios(self):
        self._send(200, {"scenarios": list_bundles()})

    # -- static console ----------------------------------------------------------

    def _serve_static(self, path: str) -> bool:
        static_root = getattr(self.server, "static_root", None)
        if static_root is None:
            return False
        rel = path.lstrip("/") or "index.html"
        target = (static_root / rel).resolve()
        if not str(target).startswith(str(static_root.resolve())):
            return False
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            return False
        data = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)
        return True


class GatewayServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, manager: SessionManager, host="127.0.0.1", port=0,
                 static_root=None):
        super().__init__((host, port), GatewayHandler)
        self.manager = manager
        self.static_root = Path(static_root) if static_root else None


def serve_gateway(manager: SessionManager, host="127.0.0.1", port=0,
                  static_root=None) -> GatewayServer:
    server = GatewayServer(manager, host, port, static_root)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    logger.info("gateway listening on %s:%d", *server.server_address)
    return server
