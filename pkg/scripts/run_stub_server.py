#!/usr/bin/env python3
"""Serve the bundled stub inference endpoint (OpenAI chat-completions shape).

echo mode returns the prompt text; oracle mode answers with the reference
translation for any source text found in the given benchmark file, which
makes a "perfect translator" for exercising the full bench pipeline.

Usage:
  python scripts/run_stub_server.py --port 8000 --mode echo
  python scripts/run_stub_server.py --port 8000 --mode oracle --benchmark demo/bench.jsonl
"""

from __future__ import annotations

import argparse

from tarjim.corpus_io import read_benchmark
from tarjim.stubserver import make_server


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--mode", choices=["echo", "oracle"], default="echo")
    parser.add_argument("--benchmark", help="benchmark JSONL (required for oracle mode)")
    args = parser.parse_args()

    oracle_pairs = None
    if args.mode == "oracle":
        if not args.benchmark:
            parser.error("--benchmark is required for oracle mode")
        oracle_pairs = read_benchmark(args.benchmark)

    server, _ = make_server(host=args.host, port=args.port, mode=args.mode,
                            oracle_pairs=oracle_pairs)
    host, port = server.server_address
    print(f"stub {args.mode} endpoint on http://{host}:{port}/v1/chat/completions")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


if __name__ == "__main__":
    main()
