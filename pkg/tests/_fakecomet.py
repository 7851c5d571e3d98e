"""In-process fake COMET scoring service for client tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class FakeCometState:
    def __init__(self, batch_limit: int = 512, fail_first: int = 0,
                 fail_after: int | None = None, model_id: str = "fake-comet-001"):
        self.batch_limit = batch_limit
        self.fail_first = fail_first  # 503 for this many initial requests
        self.fail_after = fail_after  # 503 for every request past this count
        self.model_id = model_id
        self.request_count = 0
        self.batch_sizes: list[int] = []
        self.lock = threading.Lock()


def _score(src: str, mt: str, ref: str) -> float:
    # deterministic, order-sensitive toy score
    return round((len(mt) % 97) / 96.0, 6)


class _Handler(BaseHTTPRequestHandler):
    state: FakeCometState

    def log_message(self, *args) -> None:
        pass

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:
        if self.path != "/score":
            self._send(404, {"error": "not found"})
            return
        with self.state.lock:
            self.state.request_count += 1
            count = self.state.request_count
            if self.state.fail_first > 0:
                self.state.fail_first -= 1
                self._send(503, {"error": "busy"})
                return
            if self.state.fail_after is not None and count > self.state.fail_after:
                self._send(503, {"error": "down"})
                return
        payload = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        pairs = payload["pairs"]
        with self.state.lock:
            self.state.batch_sizes.append(len(pairs))
        if len(pairs) > self.state.batch_limit:
            self._send(413, {"error": "batch too large"})
            return
        segments = [_score(p["src"], p["mt"], p["ref"]) for p in pairs]
        self._send(200, {
            "segments": segments,
            "system": sum(segments) / len(segments),
            "model_id": self.state.model_id,
        })


def start_fake_comet(**kwargs) -> tuple[ThreadingHTTPServer, FakeCometState, str]:
    state = FakeCometState(**kwargs)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address
    return server, state, f"http://{host}:{port}"
