"""Bundled stub inference endpoint speaking the OpenAI chat-completions
wire contract. Two behaviors:

* ``echo``   — the completion is the last user message, unchanged
* ``oracle`` — the completion is the reference translation for any known
               source text, loaded from a benchmark file (a "perfect"
               translator, used to exercise identity-score paths)

Used by the test suite and by ``scripts/run_stub_server.py``; not a
production component.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .records import ParallelPair


class StubState:
    def __init__(self, mode: str = "echo", fail_first: int = 0):
        self.mode = mode
        self.request_count = 0
        self.fail_first = fail_first  # respond 503 to this many requests
        self.lookup: dict[str, str] = {}
        self.lock = threading.Lock()

    def load_oracle(self, pairs: list[ParallelPair]) -> None:
        """Map each side's text to the opposite side (both directions)."""
        for pair in pairs:
            self.lookup[pair.ar.strip()] = pair.en
            self.lookup[pair.en.strip()] = pair.ar


class _Handler(BaseHTTPRequestHandler):
    state: StubState  # assigned by make_server

    def log_message(self, *args) -> None:  # silence request logging
        pass

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        if self.path == "/stats":
            with self.state.lock:
                self._send(200, {"request_count": self.state.request_count})
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self) -> None:
        if self.path != "/v1/chat/completions":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length))
            messages = payload["messages"]
            user_text = next(
                m["content"] for m in reversed(messages) if m["role"] == "user"
            )
        except (ValueError, KeyError, StopIteration):
            self._send(400, {"error": "bad request"})
            return
        with self.state.lock:
            self.state.request_count += 1
            if self.state.fail_first > 0:
                self.state.fail_first -= 1
                self._send(503, {"error": "warming up"})
                return
        if self.state.mode == "oracle":
            # The prompt may wrap the source; try exact text then suffix match.
            completion = self.state.lookup.get(user_text.strip())
            if completion is None:
                for src, tgt in self.state.lookup.items():
                    if user_text.strip().endswith(src):
                        completion = tgt
                        break
            if completion is None:
                completion = ""
        else:
            completion = user_text
        self._send(
            200,
            {
                "id": "stub",
                "object": "chat.completion",
                "model": payload.get("model", "stub"),
                "choices": [
                    {
                        "index": 0,
                        "message": {"role": "assistant", "content": completion},
                        "finish_reason": "stop",
                    }
                ],
            },
        )


def make_server(
    host: str = "127.0.0.1",
    port: int = 0,
    mode: str = "echo",
    oracle_pairs: list[ParallelPair] | None = None,
    fail_first: int = 0,
) -> tuple[ThreadingHTTPServer, StubState]:
    """Build (unstarted) server plus its shared state; port 0 picks a free
    port, readable from ``server.server_address``."""
    state = StubState(mode=mode, fail_first=fail_first)
    if oracle_pairs:
        state.load_oracle(oracle_pairs)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((host, port), handler)
    return server, state


def serve_background(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
