"""Text-level mutators that turn candidate sources into LLM queries.

Three mutators drive the search: splicing glues the head of one
candidate to the tail of another through a fill-in-the-middle query,
completion truncates a candidate at a random point and asks for a
continuation, and infilling removes a random span of lines and asks for
a replacement.  All three are deliberately text-level; syntax awareness
comes from the model, and broken responses are weeded out later when
the candidate fails to execute.

The entry-point signature line is never cut or removed, so every mutant
keeps a parseable entry point.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass

DEFAULT_MAX_INFILL_SPAN = 3

_SIGNATURE_RE = re.compile(r"^\s*def\s+gen_\w+", re.MULTILINE)


class MutatorKind(enum.Enum):
    SPLICING = "splicing"
    COMPLETION = "completion"
    INFILLING = "infilling"


# Rotation order for the per-iteration round-robin schedule.
KIND_ORDER = (MutatorKind.SPLICING, MutatorKind.COMPLETION, MutatorKind.INFILLING)


class SourceTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class MutationRequest:
    """One LLM query: a header plus a prefix and, for FIM queries, a suffix."""

    id: str
    kind: MutatorKind
    prompt_header: str
    prefix: str
    suffix: str | None
    parents: tuple[str, ...]

    def __post_init__(self):
        if not self.prompt_header:
            raise ValueError("prompt_header must be non-empty")
        if self.kind is MutatorKind.COMPLETION and self.suffix is not None:
            raise ValueError("completion requests carry no suffix")
        if self.kind is not MutatorKind.COMPLETION and self.suffix is None:
            raise ValueError(f"{self.kind.value} requests require a suffix")

    @property
    def is_fim(self) -> bool:
        return self.suffix is not None

    def prompt_prefix(self) -> str:
        """The prefix as sent to the model: header comments, then code."""
        return self.prompt_header + self.prefix


@dataclass(frozen=True)
class MutationResult:
    """The model's answer to a request, assembled into a candidate source."""

    request_id: str
    new_source: str
    raw_llm_text: str


def build_header(kind: MutatorKind, format_name: str, format_hint: str = "") -> str:
    """Comment block (at most 5 lines): purpose, task, optional format hint."""
    task = {
        MutatorKind.COMPLETION: "Continue writing the generator code below.",
        MutatorKind.INFILLING: "Rewrite the missing lines of the generator code below.",
        MutatorKind.SPLICING: "Write code joining the two program fragments below.",
    }[kind]
    lines = [
        f"# This program generates random {format_name} inputs to exercise a target program.",
        f"# {task}",
    ]
    if format_hint:
        lines.append(f"# Hint: {format_hint}")
    return "\n".join(lines) + "\n"


def signature_line(source: str) -> int:
    """1-indexed line of the generator entry point (first gen_* def).

    Falls back to the first def, then line 1, so the guard that keeps
    the signature intact never cuts the opening line of odd sources.
    """
    lines = source.splitlines()
    for i, line in enumerate(lines, start=1):
        if _SIGNATURE_RE.match(line):
            return i
    for i, line in enumerate(lines, start=1):
        if line.lstrip().startswith("def "):
            return i
    return 1


def _lines(source: str) -> list[str]:
    return source.splitlines()


def _join(lines: list[str]) -> str:
    return "\n".join(lines) + "\n" if lines else ""


def make_completion(
    parent_source: str,
    rng: random.Random,
    *,
    request_id: str,
    parent_id: str,
    format_name: str = "text",
    format_hint: str = "",
) -> MutationRequest:
    """Truncate the parent at a random point after the signature line."""
    lines = _lines(parent_source)
    if len(lines) < 2:
        raise SourceTooShortError("completion needs at least 2 lines")
    sig = signature_line(parent_source)
    if sig >= len(lines):
        raise SourceTooShortError("no lines after the entry-point signature to remove")
    # Cut at line c keeps lines 1..c-1 and removes c..end; the prefix
    # always retains the signature and at least one line is removed.
    cut = rng.randint(sig + 1, len(lines))
    return MutationRequest(
        id=request_id,
        kind=MutatorKind.COMPLETION,
        prompt_header=build_header(MutatorKind.COMPLETION, format_name, format_hint),
        prefix=_join(lines[: cut - 1]),
        suffix=None,
        parents=(parent_id,),
    )


def infill_spans(source: str, max_span: int = DEFAULT_MAX_INFILL_SPAN) -> list[tuple[int, int]]:
    """All legal (start_line, length) spans, 1-indexed, signature excluded."""
    lines = _lines(source)
    sig = signature_line(source)
    spans = []
    for start in range(sig + 1, len(lines) + 1):
        for length in range(1, max_span + 1):
            if start + length - 1 <= len(lines):
                spans.append((start, length))
    return spans


def make_infilling(
    parent_source: str,
    rng: random.Random,
    *,
    request_id: str,
    parent_id: str,
    max_span: int = DEFAULT_MAX_INFILL_SPAN,
    format_name: str = "text",
    format_hint: str = "",
) -> MutationRequest:
    """Remove a contiguous random span of lines and query for the middle."""
    lines = _lines(parent_source)
    if len(lines) < 3:
        raise SourceTooShortError("infilling needs at least 3 lines")
    spans = infill_spans(parent_source, max_span)
    if not spans:
        raise SourceTooShortError("no removable lines after the signature")
    start, length = spans[rng.randrange(len(spans))]
    return MutationRequest(
        id=request_id,
        kind=MutatorKind.INFILLING,
        prompt_header=build_header(MutatorKind.INFILLING, format_name, format_hint),
        prefix=_join(lines[: start - 1]),
        suffix=_join(lines[start + length - 1 :]),
        parents=(parent_id,),
    )


def make_splicing(
    parent_a: str,
    parent_b: str,
    rng: random.Random,
    *,
    request_id: str,
    parent_a_id: str,
    parent_b_id: str,
    format_name: str = "text",
    format_hint: str = "",
) -> MutationRequest:
    """Head of parent A up to a random cut, tail of parent B from another."""
    a_lines = _lines(parent_a)
    b_lines = _lines(parent_b)
    if len(a_lines) < 2 or len(b_lines) < 2:
        raise SourceTooShortError("splicing needs at least 2 lines in each parent")
    sig_a = signature_line(parent_a)
    sig_b = signature_line(parent_b)
    # Head keeps lines 1..ca-1 (signature included, possibly the whole
    # program); the tail starts after parent B's signature so the glued
    # candidate has exactly one entry point.  Both extremes are legal.
    ca = rng.randint(sig_a + 1, len(a_lines) + 1)
    cb = rng.randint(sig_b + 1, len(b_lines) + 1)
    return MutationRequest(
        id=request_id,
        kind=MutatorKind.SPLICING,
        prompt_header=build_header(MutatorKind.SPLICING, format_name, format_hint),
        prefix=_join(a_lines[: ca - 1]),
        suffix=_join(b_lines[cb - 1 :]),
        parents=(parent_a_id, parent_b_id),
    )


def assemble(result_text: str, request: MutationRequest) -> str:
    """Concatenate prefix, generated middle, and suffix into a candidate.

    The header never reaches the stored candidate, so re-requesting with
    the same cut reproduces the prefix byte-exactly.  A non-empty middle
    is normalized to end with a newline so the suffix starts on its own
    line; everything else is exact concatenation.
    """
    middle = result_text
    if middle and not middle.endswith("\n"):
        middle += "\n"
    return request.prefix + middle + (request.suffix or "")


def enabled_kind_rotation(enabled: set[MutatorKind]) -> tuple[MutatorKind, ...]:
    """Canonical round-robin rotation; disabled kinds drop out entirely."""
    rotation = tuple(k for k in KIND_ORDER if k in enabled)
    if not rotation:
        raise ValueError("at least one mutator kind must be enabled")
    return rotation


def plan_requests(
    survivors: list[tuple[str, str]],
    count: int,
    enabled: set[MutatorKind],
    rng: random.Random,
    *,
    id_prefix: str,
    max_span: int = DEFAULT_MAX_INFILL_SPAN,
    format_name: str = "text",
    format_hint: str = "",
) -> list[MutationRequest]:
    """Schedule one iteration's requests: round-robin over enabled kinds.

    Parents are drawn uniformly from the survivors; splicing draws an
    ordered pair without replacement when two or more survivors exist
    and degenerates to a self-splice otherwise.
    """
    if not survivors:
        raise ValueError("no survivors to mutate")
    rotation = enabled_kind_rotation(enabled)
    requests = []
    for idx in range(count):
        kind = rotation[idx % len(rotation)]
        request_id = f"{id_prefix}{idx:03d}"
        if kind is MutatorKind.SPLICING:
            if len(survivors) >= 2:
                (id_a, src_a), (id_b, src_b) = rng.sample(survivors, 2)
            else:
                (id_a, src_a) = survivors[0]
                id_b, src_b = id_a, src_a
            requests.append(
                make_splicing(
                    src_a,
                    src_b,
                    rng,
                    request_id=request_id,
                    parent_a_id=id_a,
                    parent_b_id=id_b,
                    format_name=format_name,
                    format_hint=format_hint,
                )
            )
        elif kind is MutatorKind.COMPLETION:
            parent_id, source = survivors[rng.randrange(len(survivors))]
            requests.append(
                make_completion(
                    source,
                    rng,
                    request_id=request_id,
                    parent_id=parent_id,
                    format_name=format_name,
                    format_hint=format_hint,
                )
            )
        else:
            parent_id, source = survivors[rng.randrange(len(survivors))]
            requests.append(
                make_infilling(
                    source,
                    rng,
                    request_id=request_id,
                    parent_id=parent_id,
                    max_span=max_span,
                    format_name=format_name,
                    format_hint=format_hint,
                )
            )
    return requests
