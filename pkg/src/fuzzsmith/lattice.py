"""The explored fuzzer-space lattice.

Candidate generators are partially ordered by proper inclusion of their
cover sets: one fuzzer is stronger than another when its cover set is a
proper superset.  The explored fragment is a DAG whose arrows record
witnessed strict-strength pairs; reachability over arrows always equals
the proper-subset relation on the stored covers.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Union

from .coverage import CoverSet, union_of


class Strength(enum.Enum):
    """Outcome of comparing two cover sets under the strength order."""

    STRONGER = "stronger"
    WEAKER = "weaker"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


def compare_strength(a: CoverSet, b: CoverSet) -> Strength:
    """Order `a` against `b`: stronger iff b's cover is properly contained in a's."""
    if a == b:
        return Strength.EQUIVALENT
    if b.is_proper_subset(a):
        return Strength.STRONGER
    if a.is_proper_subset(b):
        return Strength.WEAKER
    return Strength.INCOMPARABLE


@dataclass(frozen=True)
class Provenance:
    """How a candidate came to exist: the mutator kind and its parents."""

    kind: str  # "seed" | "splicing" | "completion" | "infilling"
    parents: tuple[str, ...] = ()

    KINDS = ("seed", "splicing", "completion", "infilling")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown provenance kind: {self.kind!r}")
        arity = {"seed": 0, "splicing": 2, "completion": 1, "infilling": 1}[self.kind]
        if len(self.parents) != arity:
            raise ValueError(f"{self.kind} provenance needs {arity} parents, got {len(self.parents)}")

    @classmethod
    def seed(cls) -> "Provenance":
        return cls("seed")

    @classmethod
    def splicing(cls, parent_a: str, parent_b: str) -> "Provenance":
        return cls("splicing", (parent_a, parent_b))

    @classmethod
    def completion(cls, parent: str) -> "Provenance":
        return cls("completion", (parent,))

    @classmethod
    def infilling(cls, parent: str) -> "Provenance":
        return cls("infilling", (parent,))

    def to_json(self) -> dict:
        return {"kind": self.kind, "parents": list(self.parents)}

    @classmethod
    def from_json(cls, obj: dict) -> "Provenance":
        return cls(obj["kind"], tuple(obj["parents"]))


@dataclass
class FuzzerNode:
    """An admitted candidate: source text plus its measured cover.

    The cover is the bounded-budget measurement recorded at admission
    and is never silently re-measured.
    """

    id: str
    source: str
    provenance: Provenance
    cover: CoverSet
    iteration_born: int = 0


@dataclass(frozen=True)
class ExecutionFailure:
    """A candidate that could not produce test cases; data, not an exception."""

    kind: str  # "crash" | "timeout" | "empty-output"
    detail: str = ""

    KINDS = ("crash", "timeout", "empty-output")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown failure kind: {self.kind!r}")


@dataclass(frozen=True)
class MutantRecord:
    """Input to exploration: a candidate plus its measurement outcome."""

    id: str
    source: str
    provenance: Provenance
    outcome: Union[CoverSet, ExecutionFailure]


REASON_INVALID = "invalid"
REASON_WEAKER = "weaker-or-equivalent"


@dataclass
class ExploreReport:
    admitted: list[FuzzerNode] = field(default_factory=list)
    discarded: list[tuple[str, str]] = field(default_factory=list)  # (mutant id, reason)


class UnknownNodeError(KeyError):
    pass


class FuzzerSpace:
    """The explored lattice fragment: nodes plus strict-strength arrows.

    Single-writer: admissions mutate the space and must be serialized by
    the caller; reads and the pure helpers are safe from any thread.
    """

    def __init__(self):
        self._nodes: dict[str, FuzzerNode] = {}
        self._arrows: set[tuple[str, str]] = set()

    @property
    def nodes(self) -> dict[str, FuzzerNode]:
        return self._nodes

    @property
    def arrows(self) -> frozenset[tuple[str, str]]:
        return frozenset(self._arrows)

    def node(self, node_id: str) -> FuzzerNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def add_node(self, node: FuzzerNode) -> None:
        """Insert a node without lattice checks (seeds, ablation modes).

        `explore` is the only entry point that maintains the equal-cover
        dedup and arrow discipline; direct insertion only validates id
        uniqueness and parent existence.
        """
        if node.id in self._nodes:
            raise ValueError(f"duplicate node id: {node.id}")
        for parent in node.provenance.parents:
            if parent not in self._nodes:
                raise UnknownNodeError(parent)
        self._nodes[node.id] = node

    def add_arrow(self, src: str, dst: str) -> None:
        if src not in self._nodes or dst not in self._nodes:
            raise UnknownNodeError(f"{src} -> {dst}")
        if src == dst:
            raise ValueError("self-arrows are not allowed")
        self._arrows.add((src, dst))

    def union_cover(self, node_ids) -> CoverSet:
        """Exact union of the given nodes' covers; unknown ids raise."""
        return union_of(self.node(i).cover for i in node_ids)

    def explore(self, mutants: list[MutantRecord], iteration: int = 0) -> ExploreReport:
        """Admit each mutant that survives the strength comparison.

        Per mutant: an execution failure is discarded as invalid; a
        cover contained in (or equal to) any single existing node's
        cover is discarded as weaker-or-equivalent; everything else is
        admitted, with arrows drawn from every node it strictly
        dominates.  Mutants are processed in order, so earlier admitted
        mutants take part in later comparisons.
        """
        report = ExploreReport()
        for record in mutants:
            if isinstance(record.outcome, ExecutionFailure):
                report.discarded.append((record.id, REASON_INVALID))
                continue
            cover = record.outcome
            if any(cover.issubset(node.cover) for node in self._nodes.values()):
                report.discarded.append((record.id, REASON_WEAKER))
                continue
            weaker_ids = [
                node_id
                for node_id, node in self._nodes.items()
                if node.cover.is_proper_subset(cover)
            ]
            node = FuzzerNode(
                id=record.id,
                source=record.source,
                provenance=record.provenance,
                cover=cover,
                iteration_born=iteration,
            )
            self.add_node(node)
            for node_id in weaker_ids:
                self.add_arrow(node_id, record.id)
            report.admitted.append(node)
        return report

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        nodes = [
            {
                "id": node.id,
                "source": node.source,
                "provenance": node.provenance.to_json(),
                "cover": node.cover.sorted_units(),
                "iteration_born": node.iteration_born,
            }
            for node in sorted(self._nodes.values(), key=lambda n: n.id)
        ]
        arrows = sorted(self._arrows)
        return {"nodes": nodes, "arrows": [list(a) for a in arrows]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "FuzzerSpace":
        space = cls()
        for item in obj["nodes"]:
            space._nodes[item["id"]] = FuzzerNode(
                id=item["id"],
                source=item["source"],
                provenance=Provenance.from_json(item["provenance"]),
                cover=CoverSet(item["cover"]),
                iteration_born=item["iteration_born"],
            )
        for src, dst in obj["arrows"]:
            space.add_arrow(src, dst)
        return space

    @classmethod
    def from_json(cls, text: str) -> "FuzzerSpace":
        return cls.from_json_dict(json.loads(text))
