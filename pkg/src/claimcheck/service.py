"""Stateless HTTP scoring service.

Three endpoints over JSON/HTTP 1.1:

    POST /v1/classify   {"texts": [...], "preprocess": true, "tasks": [...]}
    GET  /v1/health
    GET  /v1/model

Every error body is {"error": {"code": <stable machine code>, "message": ...}}.
Classification applies method-1 cleaning plus hashtag/handle stripping when
`preprocess` is true; it never drops a text, so response order always matches
request order. The model is shared read-only; swapping it is a single
attribute store, so each request observes exactly one model.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from . import __version__
from .classifier import LABEL_NAMES, ScorerModel, decide, score
from .corpus import TASKS
from .preprocess import clean_and_strip

DEFAULT_MAX_BATCH = 256
MAX_TEXT_CHARS = 10_000


@dataclass
class ServiceState:
    model: Optional[ScorerModel]
    model_id: str = "in-memory"
    max_batch: int = DEFAULT_MAX_BATCH


class _BadRequest(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _validate_classify(payload, max_batch: int) -> tuple[list[str], bool, list[str]]:
    if not isinstance(payload, dict):
        raise _BadRequest("invalid_request", "body must be a JSON object")
    texts = payload.get("texts")
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        raise _BadRequest("invalid_request", "'texts' must be a list of strings")
    if len(texts) == 0:
        raise _BadRequest("empty_batch", "'texts' must contain at least one text")
    if len(texts) > max_batch:
        raise _BadRequest(
            "batch_too_large", f"batch of {len(texts)} exceeds the limit of {max_batch}"
        )
    for i, text in enumerate(texts):
        if len(text) > MAX_TEXT_CHARS:
            raise _BadRequest(
                "text_too_long", f"text {i} has {len(text)} characters (limit {MAX_TEXT_CHARS})"
            )
    preprocess = payload.get("preprocess", True)
    if not isinstance(preprocess, bool):
        raise _BadRequest("invalid_request", "'preprocess' must be a boolean")
    tasks = payload.get("tasks", list(TASKS))
    if not isinstance(tasks, list) or not tasks:
        raise _BadRequest("invalid_request", "'tasks' must be a non-empty list")
    for task in tasks:
        if task not in TASKS:
            raise _BadRequest("unknown_task", f"unknown task {task!r}")
    return texts, preprocess, tasks


def classify_batch(state: ServiceState, payload) -> dict:
    texts, preprocess, tasks = _validate_classify(payload, state.max_batch)
    model = state.model  # read once: a hot swap must not split one batch
    if model is None:
        raise _BadRequest("model_unavailable", "no model loaded")
    results = []
    for text in texts:
        scored_text = text
        if preprocess:
            scored_text = clean_and_strip(scored_text)
        vector = score(model, scored_text)
        decision = decide(vector)
        scores = dict(zip(LABEL_NAMES, vector.as_tuple()))
        decisions = {}
        if "vfc" in tasks:
            decisions["vfc"] = decision.vfc
        if "harmful" in tasks:
            decisions["harmful"] = decision.harmful
        results.append({"scores": scores, "decisions": decisions})
    return {"model": state.model_id, "preprocess": preprocess, "results": results}


def health_body(state: ServiceState) -> dict:
    return {
        "model_loaded": state.model is not None,
        "model": state.model_id if state.model is not None else None,
        "version": __version__,
    }


def model_body(state: ServiceState) -> dict:
    model = state.model
    if model is None:
        raise _BadRequest("model_unavailable", "no model loaded")
    params = model.params
    return {
        "model": state.model_id,
        "labels": list(model.labels),
        "format_version": model.version,
        "hashing": {
            "ngram_min": params.ngram_min,
            "ngram_max": params.ngram_max,
            "hash_dim": params.hash_dim,
            "hash_seed": params.hash_seed,
            "sentinels": params.sentinels,
        },
    }


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: ServiceState  # assigned by make_server

    def log_message(self, fmt, *args):  # quiet by default; tests and CLI decide
        pass

    def _send_json(self, status: int, body: dict) -> None:
        blob = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def _send_error_body(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"error": {"code": code, "message": message}})

    def do_GET(self):
        if self.path == "/v1/health":
            self._send_json(200, health_body(self.state))
        elif self.path == "/v1/model":
            try:
                self._send_json(200, model_body(self.state))
            except _BadRequest as exc:
                self._send_error_body(503, exc.code, exc.message)
        else:
            self._send_error_body(404, "not_found", f"no such endpoint: {self.path}")

    def do_POST(self):
        if self.path != "/v1/classify":
            self._send_error_body(404, "not_found", f"no such endpoint: {self.path}")
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send_error_body(400, "invalid_json", "request body is not valid JSON")
            return
        try:
            body = classify_batch(self.state, payload)
        except _BadRequest as exc:
            status = 503 if exc.code == "model_unavailable" else 400
            self._send_error_body(status, exc.code, exc.message)
            return
        self._send_json(200, body)


def make_server(
    model: Optional[ScorerModel],
    host: str = "127.0.0.1",
    port: int = 0,
    model_id: str = "in-memory",
    max_batch: int = DEFAULT_MAX_BATCH,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    state = ServiceState(model=model, model_id=model_id, max_batch=max_batch)
    handler = type("Handler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((host, port), handler)
    server.state = state  # type: ignore[attr-defined]
    return server


def serve_forever(server: ThreadingHTTPServer) -> threading.Thread:
    """Run the server in a daemon thread; returns the thread."""
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
