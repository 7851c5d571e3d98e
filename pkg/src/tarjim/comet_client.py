"""Client for the remote COMET scoring service.

The service owns the model; this client owns batching, retries, ordering,
and the 0-100 presentation scale. Wire contract: ``POST {endpoint}/score``
with ``{"pairs": [{"src", "mt", "ref"}, ...]}`` returning
``{"segments": [0..1, ...], "system": mean, "model_id": str}``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

import httpx

from .errors import ConfigError, EndpointError, ProtocolError


@dataclass(frozen=True)
class CometTriple:
    src: str
    mt: str
    ref: str


@dataclass
class CometBatch:
    triples: list[CometTriple]
    endpoint: str

    def validate(self) -> None:
        if not self.triples:
            raise ConfigError("empty COMET batch")
        for i, t in enumerate(self.triples):
            if not (t.src and t.mt and t.ref):
                raise ConfigError(f"COMET triple {i} has an empty field")


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    base_delay_s: float = 1.0
    backoff_factor: float = 2.0
    jitter: float = 0.25
    timeout_s: float = 60.0
    batch_limit: int = 512  # service-side cap per request

    def delay(self, attempt: int, rng: random.Random) -> float:
        base = self.base_delay_s * self.backoff_factor**attempt
        return base * (1.0 + self.jitter * rng.random())


@dataclass
class CometResult:
    segment_scores: list[float]  # 0-100 presentation scale
    system_score: float
    raw_segments: list[float]  # service-native 0-1
    model_id: str

    def to_dict(self) -> dict:
        return {
            "system": self.system_score,
            "segments": list(self.segment_scores),
            "raw_segments": list(self.raw_segments),
            "model_id": self.model_id,
        }


class CometPartialError(EndpointError):
    """Raised when a chunk fails after retries; carries completed segments."""

    def __init__(self, message: str, completed_segments: list[float]):
        super().__init__(message)
        self.completed_segments = completed_segments


def _post_chunk(
    client: httpx.Client,
    endpoint: str,
    triples: list[CometTriple],
    policy: RetryPolicy,
    rng: random.Random,
) -> tuple[list[float], str]:
    body = {"pairs": [{"src": t.src, "mt": t.mt, "ref": t.ref} for t in triples]}
    url = endpoint.rstrip("/") + "/score"
    last_err: Exception | None = None
    for attempt in range(policy.max_retries + 1):
        try:
            resp = client.post(url, json=body, timeout=policy.timeout_s)
        except httpx.HTTPError as exc:
            last_err = exc
        else:
            if resp.status_code == 200:
                try:
                    payload = resp.json()
                    segments = payload["segments"]
                    model_id = payload["model_id"]
                except (KeyError, ValueError) as exc:
                    raise ProtocolError(f"malformed COMET response: {exc}") from exc
                if not isinstance(segments, list) or len(segments) != len(triples):
                    raise ProtocolError(
                        f"COMET returned {len(segments)} segments for {len(triples)} triples"
                    )
                return [float(s) for s in segments], str(model_id)
            if 400 <= resp.status_code < 500:
                raise EndpointError(f"COMET service rejected request: HTTP {resp.status_code}")
            last_err = EndpointError(f"HTTP {resp.status_code}")
        if attempt < policy.max_retries:
            time.sleep(policy.delay(attempt, rng))
    raise EndpointError(f"COMET request failed after retries: {last_err}")


def comet_score_remote(
    batch: CometBatch, policy: RetryPolicy | None = None
) -> CometResult:
    """Score all triples, chunked to the service batch limit, results
    re-assembled in request order. Segment scores are presented on the
    0-100 scale; the service-native [0, 1] values are retained."""
    policy = policy or RetryPolicy()
    batch.validate()
    rng = random.Random()
    raw: list[float] = []
    model_id = ""
    with httpx.Client() as client:
        for start in range(0, len(batch.triples), policy.batch_limit):
            chunk = batch.triples[start : start + policy.batch_limit]
            try:
                segments, mid = _post_chunk(client, batch.endpoint, chunk, policy, rng)
            except EndpointError as exc:
                raise CometPartialError(
                    f"failed at triple {start}: {exc}", completed_segments=list(raw)
                ) from exc
            if model_id and mid != model_id:
                raise ProtocolError(f"model id changed mid-run: {model_id!r} -> {mid!r}")
            model_id = mid
            raw.extend(segments)
    scaled = [s * 100.0 for s in raw]
    system = sum(scaled) / len(scaled)
    return CometResult(
        segment_scores=scaled, system_score=system, raw_segments=raw, model_id=model_id
    )
