"""Drive a benchmark through inference endpoints and report scores.

Each (model, direction, pair) is evaluated exactly once per cache epoch:
results land in a content-addressed cache directory (one JSON file per
record, atomic writes), keyed by model name, direction, pair id, template
hash, and decoding parameters, so interrupted runs resume without repeating
requests and edited templates invalidate cleanly.

Reports mirror the benchmark-table layout: one row per model, sorted
ascending by parsed size label, COMET / chrF++ / BLEU columns per direction,
emitted as Markdown, CSV, and a full-precision JSON dump.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .comet_client import CometBatch, CometResult, CometTriple, RetryPolicy, comet_score_remote
from .composer import Direction
from .errors import ConfigError, EndpointError, ProtocolError
from .metrics import MetricConfig, corpus_bleu, corpus_chrf_pp
from .records import BenchmarkEntry, ParallelPair

AUTH_ENV_DEFAULT = "TARJIM_API_KEY"

LANGUAGE_NAMES = {"ar": "Arabic", "en": "English"}


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    kind: str  # "chat" | "raw"
    user: str
    system: str | None = None

    _PLACEHOLDERS = ("{source_language}", "{target_language}", "{text}")

    def __post_init__(self) -> None:
        if self.kind not in ("chat", "raw"):
            raise ConfigError(f"template {self.id!r}: unknown kind {self.kind!r}")
        if "{text}" not in self.user:
            raise ConfigError(f"template {self.id!r}: user template lacks {{text}}")
        for tpl in (self.user, self.system or ""):
            rest = tpl
            for ph in self._PLACEHOLDERS:
                rest = rest.replace(ph, "")
            if "{" in rest or "}" in rest:
                raise ConfigError(
                    f"template {self.id!r}: unresolved placeholder in {tpl!r}"
                )

    def fingerprint(self) -> str:
        blob = json.dumps(
            {"id": self.id, "kind": self.kind, "system": self.system, "user": self.user},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# Best-effort transcriptions of commonly used evaluation prompts; editable
# config, not normative.
EXAMPLE_TEMPLATES: list[dict] = [
    {
        "id": "direct",
        "kind": "chat",
        "system": "You are a professional {source_language}-{target_language} translator.",
        "user": (
            "Translate the following {source_language} text to {target_language}. "
            "Output only the translation.\n\n{text}"
        ),
    },
    {
        "id": "plain",
        "kind": "chat",
        "system": None,
        "user": "Translate from {source_language} to {target_language}: {text}",
    },
    {
        "id": "instruct",
        "kind": "chat",
        "system": "You are a helpful assistant that translates text.",
        "user": (
            "Please translate this {source_language} sentence into {target_language}, "
            "returning only the translated sentence:\n{text}"
        ),
    },
    {
        "id": "minimal",
        "kind": "raw",
        "system": None,
        "user": "{source_language} to {target_language}: {text}",
    },
    {
        "id": "tagged",
        "kind": "raw",
        "system": None,
        "user": "<{source_language}> {text} </{source_language}> translate to {target_language}:",
    },
]


@dataclass(frozen=True)
class ModelProfile:
    name: str
    size_label: str
    endpoint: str
    template: str = "none"  # template id, or "none" for translation-native systems
    max_tokens: int = 512
    temperature: float = 0.0
    timeout_s: float = 60.0
    max_retries: int = 3
    retry_base_s: float = 1.0
    auth_env: str = AUTH_ENV_DEFAULT

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigError(f"profile {self.name!r}: temperature must be >= 0")
        if self.max_tokens < 1:
            raise ConfigError(f"profile {self.name!r}: max_tokens must be >= 1")

    def params_fingerprint(self) -> str:
        blob = f"{self.temperature!r}|{self.max_tokens}"
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def parse_size_label(label: str) -> float:
    """Parameter count implied by labels like "1.5B" or "350M"; unparseable
    labels sort last."""
    m = re.match(r"^\s*(\d+(?:\.\d+)?)\s*([BbMm])\b", label)
    if not m:
        return float("inf")
    value = float(m.group(1))
    return value * (1e9 if m.group(2) in "Bb" else 1e6)


@dataclass
class RunRecord:
    pair_id: str
    direction: str
    model: str
    hypothesis: str
    latency_ms: float
    attempts: int
    cache_hit: bool = False

    def cache_payload(self) -> dict:
        # cache_hit is run-local state, not part of the durable record
        return {
            "pair_id": self.pair_id,
            "direction": self.direction,
            "model": self.model,
            "hypothesis": self.hypothesis,
            "latency_ms": self.latency_ms,
            "attempts": self.attempts,
        }


@dataclass
class RunStats:
    requests: int = 0
    cache_hits: int = 0
    failures: list[str] = field(default_factory=list)


def load_profiles(path: str | Path) -> tuple[list[ModelProfile], dict[str, PromptTemplate]]:
    """Read the combined profiles + templates JSON config."""
    with open(path, encoding="utf-8") as f:
        cfg = json.load(f)
    templates = {}
    for t in cfg.get("templates", []):
        tpl = PromptTemplate(
            id=t["id"], kind=t["kind"], user=t["user"], system=t.get("system")
        )
        templates[tpl.id] = tpl
    profiles = []
    for p in cfg.get("models", []):
        profile = ModelProfile(
            name=p["name"],
            size_label=p.get("size_label", ""),
            endpoint=p["endpoint"],
            template=p.get("template", "none"),
            max_tokens=p.get("max_tokens", 512),
            temperature=p.get("temperature", 0.0),
            timeout_s=p.get("timeout_s", 60.0),
            max_retries=p.get("max_retries", 3),
            retry_base_s=p.get("retry_base_s", 1.0),
            auth_env=p.get("auth_env", AUTH_ENV_DEFAULT),
        )
        if profile.template != "none" and profile.template not in templates:
            raise ConfigError(
                f"profile {profile.name!r} references unknown template {profile.template!r}"
            )
        profiles.append(profile)
    return profiles, templates


def render_prompt(
    template: PromptTemplate | None,
    direction: Direction,
    entry: ParallelPair,
) -> list[dict] | str:
    """Resolve placeholders for one benchmark entry.

    Chat templates yield a message list, raw templates one string, and no
    template (translation-native systems) the bare source text.
    """
    source_text = entry.side(direction.src)
    if template is None:
        return source_text
    values = {
        "source_language": LANGUAGE_NAMES[direction.src],
        "target_language": LANGUAGE_NAMES[direction.tgt],
        "text": source_text,
    }

    def fill(tpl: str) -> str:
        out = tpl
        for key, value in values.items():
            out = out.replace("{" + key + "}", value)
        return out

    user = fill(template.user)
    if template.kind == "raw":
        return user
    messages = []
    if template.system:
        messages.append({"role": "system", "content": fill(template.system)})
    messages.append({"role": "user", "content": user})
    return messages


def _as_messages(rendered: list[dict] | str) -> list[dict]:
    if isinstance(rendered, str):
        return [{"role": "user", "content": rendered}]
    return rendered


def translate_one(
    profile: ModelProfile,
    rendered: list[dict] | str,
    client: httpx.Client | None = None,
) -> tuple[str, int]:
    """POST one chat-completions request; returns (hypothesis, attempts).

    The stored hypothesis is the first choice's content, trimmed and nothing
    else. Retries 5xx/timeouts with exponential backoff and jitter; 4xx is
    terminal. An empty completion is recorded as an empty hypothesis.
    """
    url = profile.endpoint.rstrip("/") + "/v1/chat/completions"
    body = {
        "model": profile.name,
        "messages": _as_messages(rendered),
        "temperature": profile.temperature,
        "max_tokens": profile.max_tokens,
    }
    headers = {}
    token = os.environ.get(profile.auth_env, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"

    own_client = client is None
    http = client or httpx.Client()
    rng = random.Random()
    last_err: Exception | None = None
    try:
        for attempt in range(1, profile.max_retries + 2):
            try:
                resp = http.post(url, json=body, headers=headers, timeout=profile.timeout_s)
            except httpx.HTTPError as exc:
                last_err = exc
            else:
                if resp.status_code == 200:
                    try:
                        content = resp.json()["choices"][0]["message"]["content"]
                    except (KeyError, IndexError, ValueError) as exc:
                        raise ProtocolError(f"malformed completion payload: {exc}") from exc
                    return (content or "").strip(), attempt
                if 400 <= resp.status_code < 500:
                    raise EndpointError(
                        f"{profile.name}: terminal HTTP {resp.status_code}"
                    )
                last_err = EndpointError(f"HTTP {resp.status_code}")
            if attempt <= profile.max_retries:
                delay = profile.retry_base_s * (2 ** (attempt - 1))
                time.sleep(delay * (1.0 + 0.25 * rng.random()))
        raise EndpointError(f"{profile.name}: retries exhausted: {last_err}")
    finally:
        if own_client:
            http.close()


def cache_key(
    profile: ModelProfile, direction: Direction, pair_id: str, template_hash: str
) -> str:
    blob = "|".join(
        [profile.name, direction.value, pair_id, template_hash, profile.params_fingerprint()]
    )
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, sort_keys=True)
    os.replace(tmp, path)


def run_benchmark(
    profiles: list[ModelProfile],
    templates: dict[str, PromptTemplate],
    entries: list[BenchmarkEntry],
    directions: list[Direction],
    cache_dir: str | Path,
    concurrency: int = 8,
) -> tuple[list[RunRecord], RunStats]:
    """Evaluate every (model, direction, pair) exactly once.

    Cached results are loaded instead of re-requested; the returned record
    list is sorted by (model, direction, pair index) and therefore identical
    regardless of concurrency or completion order. Terminal per-record
    failures are collected in the stats, never abort the run.
    """
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    stats = RunStats()
    stats_lock = threading.Lock()
    records: dict[tuple[str, str, int], RunRecord] = {}

    tasks = []
    for profile in profiles:
        template = None if profile.template == "none" else templates[profile.template]
        template_hash = template.fingerprint() if template else "none"
        for direction in directions:
            for index, entry in enumerate(entries):
                tasks.append((profile, template, template_hash, direction, index, entry))

    def run_task(task) -> tuple[tuple[str, str, int], RunRecord | None]:
        profile, template, template_hash, direction, index, entry = task
        key = (profile.name, direction.value, index)
        path = cache / (cache_key(profile, direction, entry.id, template_hash) + ".json")
        if path.exists():
            with open(path, encoding="utf-8") as f:
                payload = json.load(f)
            record = RunRecord(cache_hit=True, **payload)
            with stats_lock:
                stats.cache_hits += 1
            return key, record
        rendered = render_prompt(template, direction, entry)
        start = time.monotonic()
        try:
            hypothesis, attempts = translate_one(profile, rendered)
        except (EndpointError, ProtocolError) as exc:
            with stats_lock:
                stats.requests += 1
                stats.failures.append(
                    f"{profile.name}/{direction.value}/{entry.id}: {exc}"
                )
            return key, None
        latency_ms = (time.monotonic() - start) * 1000.0
        record = RunRecord(
            pair_id=entry.id,
            direction=direction.value,
            model=profile.name,
            hypothesis=hypothesis,
            latency_ms=latency_ms,
            attempts=attempts,
        )
        _atomic_write_json(path, record.cache_payload())
        with stats_lock:
            stats.requests += 1
        return key, record

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        for key, record in pool.map(run_task, tasks):
            if record is not None:
                records[key] = record

    ordered = [records[k] for k in sorted(records)]
    return ordered, stats


@dataclass
class EvalCell:
    bleu: float | None = None
    chrf_pp: float | None = None
    comet: float | None = None
    coverage: tuple[int, int] = (0, 0)  # (scored, expected)


@dataclass
class EvalReport:
    cells: dict[tuple[str, str], EvalCell]  # (model, direction) -> scores
    model_sizes: dict[str, str]
    directions: list[str]
    metric_fingerprint: str
    comet_model_id: str | None = None

    def sorted_models(self) -> list[str]:
        return sorted(
            self.model_sizes,
            key=lambda m: (parse_size_label(self.model_sizes[m]), m),
        )

    def to_dict(self) -> dict:
        return {
            "metric_fingerprint": self.metric_fingerprint,
            "comet_model_id": self.comet_model_id,
            "directions": list(self.directions),
            "models": [
                {
                    "name": model,
                    "size_label": self.model_sizes[model],
                    "results": {
                        direction: {
                            "bleu": cell.bleu,
                            "chrf_pp": cell.chrf_pp,
                            "comet": cell.comet,
                            "coverage": list(cell.coverage),
                        }
                        for direction in self.directions
                        if (cell := self.cells.get((model, direction))) is not None
                    },
                }
                for model in self.sorted_models()
            ],
        }


_DIRECTION_HEADERS = {"ar2en": "Arabic → English", "en2ar": "English → Arabic"}


def _fmt(value: float | None) -> str:
    return f"{value:.2f}" if value is not None else "-"


def render_markdown(report: EvalReport) -> str:
    metrics = (["COMET"] if report.comet_model_id else []) + ["chrF++", "BLEU"]
    head = ["Model", "Size"]
    for direction in report.directions:
        label = _DIRECTION_HEADERS.get(direction, direction)
        head += [f"{label} {m}" for m in metrics]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for model in report.sorted_models():
        row = [model, report.model_sizes[model]]
        for direction in report.directions:
            cell = report.cells.get((model, direction), EvalCell())
            if report.comet_model_id:
                row.append(_fmt(cell.comet))
            row += [_fmt(cell.chrf_pp), _fmt(cell.bleu)]
        lines.append("| " + " | ".join(row) + " |")
    notes = []
    for model in report.sorted_models():
        for direction in report.directions:
            cell = report.cells.get((model, direction), EvalCell())
            scored, expected = cell.coverage
            if scored != expected:
                notes.append(f"- {model} {direction}: coverage {scored}/{expected}")
    if notes:
        lines += ["", "Coverage gaps:"] + notes
    return "\n".join(lines) + "\n"


def render_csv(report: EvalReport) -> str:
    metrics = (["comet"] if report.comet_model_id else []) + ["chrf_pp", "bleu"]
    head = ["model", "size"]
    for direction in report.directions:
        head += [f"{direction}_{m}" for m in metrics]
        head.append(f"{direction}_coverage")
    rows = [",".join(head)]
    for model in report.sorted_models():
        row = [model, report.model_sizes[model]]
        for direction in report.directions:
            cell = report.cells.get((model, direction), EvalCell())
            if report.comet_model_id:
                row.append(_fmt(cell.comet))
            row += [_fmt(cell.chrf_pp), _fmt(cell.bleu)]
            row.append(f"{cell.coverage[0]}/{cell.coverage[1]}")
        rows.append(",".join(row))
    return "\n".join(rows) + "\n"


def score_and_report(
    records: Iterable[RunRecord],
    entries: list[BenchmarkEntry],
    model_sizes: dict[str, str],
    metric_cfg: MetricConfig | None = None,
    comet_endpoint: str | None = None,
    comet_policy: RetryPolicy | None = None,
) -> EvalReport:
    """Corpus-score the records per (model, direction).

    Pairs missing a hypothesis leave an explicit coverage hole; scores are
    computed over the covered subset. COMET columns appear only when an
    endpoint is given.
    """
    metric_cfg = metric_cfg or MetricConfig()
    by_id = {e.id: e for e in entries}
    grouped: dict[tuple[str, str], dict[str, str]] = {}
    for record in records:
        grouped.setdefault((record.model, record.direction), {})[record.pair_id] = (
            record.hypothesis
        )

    directions = sorted({direction for _, direction in grouped})
    cells: dict[tuple[str, str], EvalCell] = {}
    comet_model_id: str | None = None
    for (model, direction), hyp_by_id in sorted(grouped.items()):
        dir_enum = Direction(direction)
        hyps: list[str] = []
        refs: list[str] = []
        srcs: list[str] = []
        for entry in entries:
            hyp = hyp_by_id.get(entry.id)
            if hyp is None:
                continue
            hyps.append(hyp)
            refs.append(entry.side(dir_enum.tgt))
            srcs.append(entry.side(dir_enum.src))
        cell = EvalCell(coverage=(len(hyps), len(entries)))
        if hyps:
            cell.bleu = corpus_bleu(hyps, refs, metric_cfg).score
            cell.chrf_pp = corpus_chrf_pp(hyps, refs, metric_cfg).score
            if comet_endpoint:
                result: CometResult = comet_score_remote(
                    CometBatch(
                        triples=[
                            CometTriple(src=s, mt=h, ref=r)
                            for s, h, r in zip(srcs, hyps, refs)
                        ],
                        endpoint=comet_endpoint,
                    ),
                    comet_policy,
                )
                cell.comet = result.system_score
                comet_model_id = result.model_id
        cells[(model, direction)] = cell

    return EvalReport(
        cells=cells,
        model_sizes=dict(model_sizes),
        directions=directions,
        metric_fingerprint=metric_cfg.fingerprint(),
        comet_model_id=comet_model_id,
    )


def write_report_files(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "markdown": out / "report.md",
        "csv": out / "report.csv",
        "json": out / "report.json",
    }
    paths["markdown"].write_text(render_markdown(report), encoding="utf-8")
    paths["csv"].write_text(render_csv(report), encoding="utf-8")
    paths["json"].write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return paths
