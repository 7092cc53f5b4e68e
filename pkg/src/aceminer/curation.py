"""Local HTTP service hosting the mapping-review workflow.

State model: the append-only JSON-lines decision log is the single source
of truth. On startup the service replays the log over the candidate set;
each accepted POST is validated with the same rules as the offline
``apply_decisions``, appended, fsynced, and only then applied in memory,
so killing the process at any point loses at most the response, never a
logged decision. One lock file per log enforces a single writable session.
"""

import json
import logging
import os
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import CurationError
from .lexicon import Lexicon
from .terminology import (
    CurationDecision,
    MappingCandidateSet,
    Terminology,
    accepted_entries,
    append_decision,
    candidate_set_to_json,
    load_candidate_set,
    read_decision_log,
    terminology_to_json,
    validate_decision,
)

logger = logging.getLogger(__name__)

try:
    import fcntl
except ImportError:  # non-POSIX: fall back to O_EXCL lock files
    fcntl = None


def default_assets_dir() -> Path:
    return Path(__file__).parent / "static"


@dataclass
class CurationSession:
    candidate_path: Path
    decision_log_path: Path
    host: str = "127.0.0.1"
    port: int = 8787
    assets_dir: Path | None = None
    lexicon: Lexicon | None = None


class _LogLock:
    """One writable session per decision log, released on process death."""

    def __init__(self, log_path: Path):
        self.lock_path = Path(str(log_path) + ".lock")
        self._fh = None

    def acquire(self) -> None:
        fh = open(self.lock_path, "a+")
        if fcntl is not None:
            try:
                fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError:
                fh.close()
                raise CurationError(
                    f"decision log is locked by another session ({self.lock_path})"
                )
        self._fh = fh

    def release(self) -> None:
        if self._fh is not None:
            if fcntl is not None:
                fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()
            self._fh = None


class CurationService:
    """Owns the candidate set, the decision log, and the HTTP server."""

    def __init__(self, session: CurationSession):
        self.session = session
        with open(session.candidate_path, "r", encoding="utf-8") as f:
            self.candidate_set: MappingCandidateSet = load_candidate_set(f)
        self._rows = {row.class_iri: row for row in self.candidate_set.rows}
        # (timestamp, log order) of the currently winning decision per row,
        # mirroring apply_decisions' last-writer-wins rule.
        self._winner: dict[str, tuple] = {}
        self._order = 0

        self._lock = _LogLock(session.decision_log_path)
        self._lock.acquire()
        self._write_mutex = threading.Lock()

        log_path = session.decision_log_path
        if log_path.exists():
            with open(log_path, "r", encoding="utf-8") as f:
                for decision in read_decision_log(f):
                    self._apply(decision)
        self._log_fh = open(log_path, "a", encoding="utf-8")

        self._server: ThreadingHTTPServer | None = None

    # --- state ----------------------------------------------------------

    def _apply(self, decision: CurationDecision) -> None:
        """Replay/record one valid decision, last writer winning."""
        row = validate_decision(self.candidate_set, decision)
        self._order += 1
        stamp = (decision.timestamp, self._order)
        if decision.class_iri in self._winner and stamp <= self._winner[decision.class_iri]:
            return
        self._winner[decision.class_iri] = stamp
        row.resolution = decision

    def record(self, decision: CurationDecision) -> None:
        """Validate, append, fsync, then apply. Serialized across threads."""
        with self._write_mutex:
            validate_decision(self.candidate_set, decision)
            append_decision(decision, self._log_fh)
            os.fsync(self._log_fh.fileno())
            self._apply(decision)

    def progress(self) -> dict:
        return self.candidate_set.progress()

    def preview(self) -> Terminology:
        entries = accepted_entries(self.candidate_set, self.session.lexicon)
        return Terminology(name="curation-preview", entries=entries)

    def rows_payload(self, status: str) -> list[dict]:
        payload = json.loads(candidate_set_to_json(self.candidate_set))["rows"]
        for row in payload:
            row["status"] = self._rows[row["class_iri"]].status
        if status != "all":
            payload = [r for r in payload if r["status"] == status]
        return payload

    # --- server lifecycle -------------------------------------------------

    def start(self) -> str:
        """Bind and serve on a background thread; returns the base URL."""
        handler = _make_handler(self)
        self._server = ThreadingHTTPServer((self.session.host, self.session.port), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        host, port = self._server.server_address[:2]
        self.base_url = f"http://{host}:{port}"
        return self.base_url

    def serve_forever(self) -> None:
        handler = _make_handler(self)
        self._server = ThreadingHTTPServer((self.session.host, self.session.port), handler)
        host, port = self._server.server_address[:2]
        print(f"curation service listening on http://{host}:{port}", flush=True)
        try:
            self._server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self.close()

    def close(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
        self._log_fh.close()
        self._lock.release()


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
}


def _make_handler(service: CurationService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            logger.debug("%s - %s", self.address_string(), fmt % args)

        def _send_json(self, payload, status: int = 200) -> None:
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            parsed = urlparse(self.path)
            route = parsed.path
            if route == "/api/candidates":
                status = parse_qs(parsed.query).get("status", ["all"])[0]
                if status not in ("all", "unresolved", "accepted", "rejected"):
                    self._send_json({"error": f"unknown status filter {status!r}"}, 400)
                    return
                self._send_json({"rows": service.rows_payload(status)})
            elif route == "/api/progress":
                self._send_json(service.progress())
            elif route == "/api/terminology/preview":
                self._send_json(json.loads(terminology_to_json(service.preview())))
            else:
                self._serve_static(route)

        def do_POST(self):
            if urlparse(self.path).path != "/api/decisions":
                self._send_json({"error": "not found"}, 404)
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                decision = CurationDecision.from_dict(json.loads(raw.decode("utf-8")))
            except (ValueError, CurationError) as exc:
                self._send_json({"error": str(exc)}, 422)
                return
            try:
                service.record(decision)
            except CurationError as exc:
                self._send_json({"error": str(exc)}, 422)
                return
            self._send_json(
                {"ok": True, "class_iri": decision.class_iri, "progress": service.progress()}
            )

        def _serve_static(self, route: str) -> None:
            assets = service.session.assets_dir or default_assets_dir()
            name = "index.html" if route in ("", "/") else route.lstrip("/")
            path = (assets / name).resolve()
            try:
                path.relative_to(assets.resolve())
            except ValueError:
                self._send_json({"error": "not found"}, 404)
                return
            if not path.is_file():
                self._send_json({"error": "not found"}, 404)
                return
            body = path.read_bytes()
            self.send_response(200)
            ctype = _CONTENT_TYPES.get(path.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve(session: CurationSession) -> CurationService:
    """Start a curation service on a background thread (library entry)."""
    service = CurationService(session)
    service.start()
    return service
