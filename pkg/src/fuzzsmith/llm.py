"""Model backends for completion and fill-in-the-middle queries.

The evolution loop is model-agnostic: it only needs `complete` and
`fill_in_middle` over text.  Three backends implement that contract:

* `HttpLlm` talks to an OpenAI-compatible completions endpoint, either
  passing the suffix natively or wrapping FIM queries in sentinel
  tokens for models trained that way.
* `MockLlm` emits deterministic code fragments from a per-format pool
  so the whole loop runs offline (CI has no GPU).
* `ScriptedLlm` replays a fixed response list for walkthrough tests.

Prompts contain only the task header and candidate code; coverage data
and lattice state never reach the model.
"""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

from .mutation import MutationRequest, MutationResult, assemble

logger = logging.getLogger(__name__)


class LlmError(RuntimeError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str = ""
    model_name: str = ""
    temperature: float = 0.2
    repetition_penalty: float = 1.15
    max_total_tokens: int = 8192
    max_new_tokens: int = 512
    request_timeout: float = 120.0
    retries: int = 3
    max_concurrent_requests: int = 8
    # "native" sends the suffix as an API parameter; "sentinel" wraps the
    # FIM query in the tokens below and sends it as a plain completion.
    fim_mode: str = "sentinel"
    fim_prefix_token: str = "<PRE>"
    fim_suffix_token: str = "<SUF>"
    fim_middle_token: str = "<MID>"
    stop_sequences: tuple[str, ...] = ("<EOT>",)
    api_key: str = ""
    log_bodies: bool = False

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not (self.max_total_tokens > self.max_new_tokens > 0):
            raise ValueError("need max_total_tokens > max_new_tokens > 0")
        if self.fim_mode not in ("native", "sentinel"):
            raise ValueError(f"unknown fim_mode: {self.fim_mode!r}")


def estimate_tokens(text: str) -> int:
    """Pluggable token estimate; the default is the bytes/4 heuristic."""
    return (len(text.encode()) + 3) // 4


def truncate_prompt(prompt: str, budget_tokens: int) -> str:
    """Drop middle-of-prompt code lines until the prompt fits.

    Leading comment lines (the task header) plus the first and last ten
    code lines are always preserved.
    """
    if estimate_tokens(prompt) <= budget_tokens:
        return prompt
    lines = prompt.splitlines()
    header_end = 0
    while header_end < len(lines) and lines[header_end].startswith("#"):
        header_end += 1
    header = lines[:header_end]
    code = lines[header_end:]
    keep_head, keep_tail = code[:10], code[-10:] if len(code) > 20 else []
    middle = code[10 : len(code) - 10] if len(code) > 20 else []
    while middle:
        candidate = "\n".join(header + keep_head + ["# ..."] + middle + keep_tail) + "\n"
        if estimate_tokens(candidate) <= budget_tokens:
            return candidate
        middle = middle[1:]
    candidate = "\n".join(header + keep_head + (["# ..."] if keep_tail else []) + keep_tail) + "\n"
    if estimate_tokens(candidate) > budget_tokens:
        raise LlmError("prompt exceeds the token budget even after truncation")
    return candidate


class HttpLlm:
    """Client for an OpenAI-compatible completions endpoint."""

    parallel_safe = True

    def __init__(self, cfg: LlmConfig):
        if not cfg.endpoint_url:
            raise ValueError("endpoint_url is required for the HTTP backend")
        self.cfg = cfg
        self._session = requests.Session()

    def _post(self, payload: dict) -> str:
        cfg = self.cfg
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        if cfg.log_bodies:
            redacted = dict(headers)
            if "Authorization" in redacted:
                redacted["Authorization"] = "Bearer ***"
            logger.info("llm request headers=%s body=%s", redacted, json.dumps(payload))
        last_error: Exception | None = None
        for attempt in range(1, cfg.retries + 1):
            try:
                response = self._session.post(
                    cfg.endpoint_url,
                    json=payload,
                    headers=headers,
                    timeout=cfg.request_timeout,
                )
                response.raise_for_status()
                body = response.json()
                if cfg.log_bodies:
                    logger.info("llm response body=%s", json.dumps(body))
                try:
                    return body["choices"][0]["text"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise LlmError(f"malformed backend response: {body!r}") from exc
            except (requests.RequestException, LlmError) as exc:
                last_error = exc
                logger.warning("llm request attempt %d/%d failed: %s", attempt, cfg.retries, exc)
        raise LlmError(f"llm request failed after {cfg.retries} attempts: {last_error}")

    def _payload(self, prompt: str, extra: dict | None = None) -> dict:
        cfg = self.cfg
        payload = {
            "model": cfg.model_name,
            "prompt": prompt,
            "max_tokens": cfg.max_new_tokens,
            "temperature": cfg.temperature,
            "repetition_penalty": cfg.repetition_penalty,
        }
        if cfg.stop_sequences:
            payload["stop"] = list(cfg.stop_sequences)
        if extra:
            payload.update(extra)
        return payload

    def complete(self, prompt: str, request_tag: str | None = None) -> str:
        budget = self.cfg.max_total_tokens
        prompt = truncate_prompt(prompt, budget)
        return self._post(self._payload(prompt))

    def fill_in_middle(self, prefix: str, suffix: str, request_tag: str | None = None) -> str:
        cfg = self.cfg
        if not suffix:
            return self.complete(prefix)
        if cfg.fim_mode == "native":
            prompt = truncate_prompt(prefix, cfg.max_total_tokens - estimate_tokens(suffix))
            text = self._post(self._payload(prompt, {"suffix": suffix}))
        else:
            wrapped = (
                f"{cfg.fim_prefix_token}{prefix}{cfg.fim_suffix_token}{suffix}{cfg.fim_middle_token}"
            )
            if estimate_tokens(wrapped) > cfg.max_total_tokens:
                overhead = estimate_tokens(wrapped) - estimate_tokens(prefix)
                prefix = truncate_prompt(prefix, cfg.max_total_tokens - overhead)
                wrapped = (
                    f"{cfg.fim_prefix_token}{prefix}{cfg.fim_suffix_token}"
                    f"{suffix}{cfg.fim_middle_token}"
                )
            text = self._post(self._payload(wrapped))
        return strip_sentinels(text, cfg)


def strip_sentinels(text: str, cfg: LlmConfig) -> str:
    """Cut the middle at the first sentinel or stop marker the model echoed."""
    for marker in (
        cfg.fim_prefix_token,
        cfg.fim_suffix_token,
        cfg.fim_middle_token,
        *cfg.stop_sequences,
    ):
        pos = text.find(marker)
        if pos != -1:
            text = text[:pos]
    return text


# -- offline backends -------------------------------------------------------

# Fragment bodies are written at function-body level; the mock re-indents
# them to the indentation implied by the prompt's last code line.
MOCK_POOLS: dict[str, list[str]] = {
    "parens": [
        'output.write("(")',
        'output.write(")")',
        'output.write("*")',
        'output.write("()")',
        'output.write("(" * rng.randint(0, 3))',
        'output.write("()" * rng.randint(0, 3))',
        'for _ in range(rng.randint(0, 2)):\n    output.write("()")',
        'if rng.randint(0, 1) == 0:\n    output.write(")")',
        'if rng.randint(0, 2) == 0:\n    output.write("*")',
        "pass",
    ],
    "text": [
        "output.write(rng.read_chars(rng.randint(0, 8)))",
        "output.write(str(rng.randint(0, 9)))",
        'output.write(" ")',
        "pass",
    ],
}

BROKEN_FRAGMENTS = [
    "output.write(",
    "retrn 1",
    "output.write(1 +)",
    "whlie True:",
]


@dataclass
class MockLlmRules:
    """Deterministic behavior of the mock backend."""

    seed: int = 0
    pool_name: str = "parens"
    invalid_rate: float = 0.1
    max_fragments: int = 2
    token_pool: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.invalid_rate <= 1.0:
            raise ValueError("invalid_rate must be in [0, 1]")
        if not self.token_pool:
            if self.pool_name not in MOCK_POOLS:
                raise ValueError(f"unknown mock pool: {self.pool_name!r}")
            self.token_pool = list(MOCK_POOLS[self.pool_name])


def _prompt_indent(prompt: str) -> int:
    """Indentation for generated code, inferred from the last code line."""
    last = ""
    for line in prompt.splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            last = line
    if not last:
        return 4
    indent = len(last) - len(last.lstrip())
    if last.rstrip().endswith(":"):
        indent += 4
    return max(indent, 4)


class MockLlm:
    """Offline model: seeded fragment choice, optional broken output.

    Responses are a pure function of (seed, request tag); untagged
    calls fall back to a per-instance call counter.  Either way an
    identical (seed, request sequence) pair produces an identical
    response sequence, and tagged requests stay stable across resumed
    runs.
    """

    parallel_safe = False

    def __init__(self, rules: MockLlmRules):
        self.rules = rules
        self._calls = 0

    def _fragment(self, prompt: str, fim: bool, tag: str | None) -> str:
        self._calls += 1
        key = tag if tag is not None else str(self._calls)
        rng = random.Random(f"{self.rules.seed}:{key}")
        indent = _prompt_indent(prompt)
        if rng.random() < self.rules.invalid_rate:
            body = BROKEN_FRAGMENTS[rng.randrange(len(BROKEN_FRAGMENTS))]
            return _indent_fragment(body, indent)
        n = 1 if fim else rng.randint(1, self.rules.max_fragments)
        parts = [
            _indent_fragment(self.rules.token_pool[rng.randrange(len(self.rules.token_pool))], indent)
            for _ in range(n)
        ]
        return "".join(parts)

    def complete(self, prompt: str, request_tag: str | None = None) -> str:
        return self._fragment(prompt, fim=False, tag=request_tag)

    def fill_in_middle(self, prefix: str, suffix: str, request_tag: str | None = None) -> str:
        if not suffix:
            return self.complete(prefix, request_tag)
        return self._fragment(prefix, fim=True, tag=request_tag)


def _indent_fragment(body: str, indent: int) -> str:
    pad = " " * indent
    return "".join(pad + line + "\n" for line in body.splitlines())


class ScriptedLlm:
    """Replays a fixed response list, one per request, in order."""

    parallel_safe = False

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._cursor = 0

    def _next(self) -> str:
        if self._cursor >= len(self._responses):
            raise LlmError("scripted backend ran out of responses")
        text = self._responses[self._cursor]
        self._cursor += 1
        return text

    def complete(self, prompt: str, request_tag: str | None = None) -> str:
        return self._next()

    def fill_in_middle(self, prefix: str, suffix: str, request_tag: str | None = None) -> str:
        return self._next()


def run_requests(
    backend,
    reqs: list[MutationRequest],
    max_concurrent: int = 8,
) -> list[MutationResult | None]:
    """Execute requests and assemble candidates, preserving request order.

    A failed request yields None (the caller counts it as an invalid
    mutant); failures never abort the batch.  Parallelism is bounded and
    only used for backends that declare themselves parallel-safe.
    """

    def one(req: MutationRequest) -> MutationResult | None:
        try:
            if req.is_fim:
                text = backend.fill_in_middle(req.prompt_prefix(), req.suffix, request_tag=req.id)
            else:
                text = backend.complete(req.prompt_prefix(), request_tag=req.id)
        except LlmError as exc:
            logger.warning("request %s failed: %s", req.id, exc)
            return None
        return MutationResult(request_id=req.id, new_source=assemble(text, req), raw_llm_text=text)

    if getattr(backend, "parallel_safe", False) and max_concurrent > 1 and len(reqs) > 1:
        with ThreadPoolExecutor(max_workers=max_concurrent) as pool:
            return list(pool.map(one, reqs))
    return [one(req) for req in reqs]
