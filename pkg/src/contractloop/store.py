"""Project store: typed trace nodes, traceability links, and the
single-file `project.json` persistence they live in.

The store is the single writer for a project; mutations are serialized by
an internal lock, reads work against plain dict snapshots. The whole
project is loaded and saved as one JSON document; unknown top-level keys
survive a load/save cycle.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import DanglingRefError, KindMismatchError, UnknownNodeError, ValidationError
from .ids import new_id

SCHEMA_VERSION = 1

NODE_KINDS = ("intent", "task", "contract", "code_unit", "test_case", "violation")

_KIND_PREFIX = {
    "intent": "in",
    "task": "tk",
    "contract": "ct",
    "code_unit": "cu",
    "test_case": "tc",
    "violation": "vi",
}

_NODE_STORE_KEY = {
    "intent": "intents",
    "task": "tasks",
    "contract": "contracts",
    "code_unit": "code_units",
    "test_case": "test_cases",
    "violation": "violations",
}

# edge kind -> (from node kind, to node kind)
EDGE_SIGNATURES = {
    "decomposes_to": ("intent", "task"),
    "specified_by": ("task", "contract"),
    "implemented_by": ("task", "code_unit"),
    "tested_by": ("contract", "test_case"),
    "violated_by": ("contract", "violation"),
}

# edges whose restriction must stay acyclic
_DAG_EDGES = ("decomposes_to", "specified_by", "implemented_by")

UNIT_KINDS = ("constructor", "method", "module")


@dataclass(frozen=True)
class TraceLink:
    link_id: str
    from_ref: Tuple[str, str]  # (node_kind, node_id)
    to_ref: Tuple[str, str]
    edge_kind: str


@dataclass(frozen=True)
class IntegrityDefect:
    code: str  # "dangling" | "kind_mismatch" | "cycle" | "orphan_contract" | ...
    message: str
    node_ids: Tuple[str, ...]


@dataclass(frozen=True)
class Subgraph:
    nodes: Dict[str, Dict[str, dict]]  # kind -> id -> payload
    links: List[TraceLink]

    def node_ids(self):
        return {node_id for by_id in self.nodes.values() for node_id in by_id}


class ProjectStore:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._lock = threading.RLock()
        self.nodes: Dict[str, Dict[str, dict]] = {kind: {} for kind in NODE_KINDS}
        self.links: Dict[str, TraceLink] = {}
        self.test_plans: Dict[str, dict] = {}
        self.reports: Dict[str, dict] = {}
        self.runs: Dict[str, dict] = {}
        self._extra: Dict[str, object] = {}

    # --- node operations ---

    def _validate_payload(self, kind, payload):
        if not isinstance(payload, dict):
            raise ValidationError(f"{kind} payload must be a mapping")
        if kind == "intent":
            if not str(payload.get("prompt_text", "")).strip():
                raise ValidationError("intent.prompt_text must be non-empty")
        elif kind == "task":
            if not str(payload.get("title", "")).strip():
                raise ValidationError("task.title must be non-empty")
            intent_id = payload.get("intent_id")
            if intent_id not in self.nodes["intent"]:
                raise ValidationError(f"task.intent_id does not resolve: {intent_id}")
            order_index = payload.get("order_index")
            if not isinstance(order_index, int) or order_index < 0:
                raise ValidationError("task.order_index must be an integer >= 0")
            for other in self.nodes["task"].values():
                if other["intent_id"] == intent_id and other["order_index"] == order_index:
                    raise ValidationError(
                        f"task.order_index {order_index} already used within intent {intent_id}"
                    )
            if payload.get("unit_kind") not in UNIT_KINDS:
                raise ValidationError(f"task.unit_kind must be one of {UNIT_KINDS}")

    def add_node(self, kind: str, payload: dict) -> str:
        if kind not in NODE_KINDS:
            raise ValidationError(f"unknown node kind: {kind}")
        with self._lock:
            self._validate_payload(kind, payload)
            node_id = new_id(_KIND_PREFIX[kind])
            stored = dict(payload)
            stored.setdefault("created_at", time.time())
            self.nodes[kind][node_id] = stored
            return node_id

    def get_node(self, kind: str, node_id: str) -> dict:
        try:
            return self.nodes[kind][node_id]
        except KeyError:
            raise UnknownNodeError(f"no {kind} node with id {node_id}") from None

    def has_node(self, ref: Tuple[str, str]) -> bool:
        kind, node_id = ref
        return kind in self.nodes and node_id in self.nodes[kind]

    # --- link operations ---

    def link(self, from_ref: Tuple[str, str], to_ref: Tuple[str, str], edge_kind: str) -> str:
        if edge_kind not in EDGE_SIGNATURES:
            raise KindMismatchError(f"unknown edge kind: {edge_kind}")
        with self._lock:
            want_from, want_to = EDGE_SIGNATURES[edge_kind]
            if from_ref[0] != want_from or to_ref[0] != want_to:
                raise KindMismatchError(
                    f"{edge_kind} links {want_from} -> {want_to}, "
                    f"got {from_ref[0]} -> {to_ref[0]}"
                )
            for ref in (from_ref, to_ref):
                if not self.has_node(ref):
                    raise DanglingRefError(f"no {ref[0]} node with id {ref[1]}")
            for existing in self.links.values():
                if (
                    existing.from_ref == tuple(from_ref)
                    and existing.to_ref == tuple(to_ref)
                    and existing.edge_kind == edge_kind
                ):
                    return existing.link_id  # idempotent
                if (
                    edge_kind == "specified_by"
                    and existing.edge_kind == "specified_by"
                    and existing.to_ref == tuple(to_ref)
                ):
                    raise ValidationError(
                        f"contract {to_ref[1]} is already specified by task {existing.from_ref[1]}"
                    )
            link_id = new_id("ln")
            self.links[link_id] = TraceLink(link_id, tuple(from_ref), tuple(to_ref), edge_kind)
            return link_id

    def lineage(self, node_ref: Tuple[str, str]) -> Subgraph:
        """All nodes reachable from node_ref following links in either
        direction, plus the edges among them."""
        if not self.has_node(node_ref):
            raise UnknownNodeError(f"no {node_ref[0]} node with id {node_ref[1]}")
        adjacency: Dict[Tuple[str, str], list] = {}
        for trace_link in self.links.values():
            adjacency.setdefault(trace_link.from_ref, []).append(trace_link.to_ref)
            adjacency.setdefault(trace_link.to_ref, []).append(trace_link.from_ref)
        seen = {tuple(node_ref)}
        frontier = [tuple(node_ref)]
        while frontier:
            current = frontier.pop()
            for neighbor in adjacency.get(current, ()):
                if neighbor not in seen:
                    seen.add(neighbor)
                    frontier.append(neighbor)
        nodes: Dict[str, Dict[str, dict]] = {}
        for kind, node_id in sorted(seen):
            nodes.setdefault(kind, {})[node_id] = self.nodes[kind][node_id]
        links = sorted(
            (l for l in self.links.values() if l.from_ref in seen and l.to_ref in seen),
            key=lambda l: (l.edge_kind, l.from_ref[1], l.to_ref[1]),
        )
        return Subgraph(nodes, links)

    # --- integrity ---

    def check_integrity(self) -> List[IntegrityDefect]:
        defects = []
        for trace_link in self.links.values():
            want_from, want_to = EDGE_SIGNATURES[trace_link.edge_kind]
            if trace_link.from_ref[0] != want_from or trace_link.to_ref[0] != want_to:
                defects.append(
                    IntegrityDefect(
                        "kind_mismatch",
                        f"link {trace_link.link_id} ({trace_link.edge_kind}) joins "
                        f"{trace_link.from_ref[0]} -> {trace_link.to_ref[0]}",
                        (trace_link.link_id,),
                    )
                )
            for ref in (trace_link.from_ref, trace_link.to_ref):
                if not self.has_node(ref):
                    defects.append(
                        IntegrityDefect(
                            "dangling",
                            f"link {trace_link.link_id} references missing {ref[0]} {ref[1]}",
                            (trace_link.link_id, ref[1]),
                        )
                    )
        defects.extend(self._check_dag())
        # every approved contract needs exactly one incoming specified_by edge
        incoming: Dict[str, int] = {}
        for trace_link in self.links.values():
            if trace_link.edge_kind == "specified_by":
                incoming[trace_link.to_ref[1]] = incoming.get(trace_link.to_ref[1], 0) + 1
        for contract_id, record in self.nodes["contract"].items():
            if record.get("status") == "approved":
                count = incoming.get(contract_id, 0)
                if count == 0:
                    defects.append(
                        IntegrityDefect(
                            "orphan_contract",
                            f"approved contract {contract_id} has no specified_by edge",
                            (contract_id,),
                        )
                    )
                elif count > 1:
                    defects.append(
                        IntegrityDefect(
                            "ambiguous_contract",
                            f"approved contract {contract_id} has {count} specified_by edges",
                            (contract_id,),
                        )
                    )
        return defects

    def _check_dag(self):
        edges: Dict[Tuple[str, str], list] = {}
        for trace_link in self.links.values():
            if trace_link.edge_kind in _DAG_EDGES:
                edges.setdefault(trace_link.from_ref, []).append(trace_link.to_ref)
        state: Dict[Tuple[str, str], int] = {}  # 1 = on stack, 2 = done
        cycles = []

        def visit(node, stack):
            state[node] = 1
            for child in edges.get(node, ()):
                if state.get(child) == 1:
                    cycles.append(tuple(ref[1] for ref in stack + [child]))
                elif state.get(child) is None:
                    visit(child, stack + [child])
            state[node] = 2

        for node in list(edges):
            if state.get(node) is None:
                visit(node, [node])
        return [
            IntegrityDefect("cycle", f"cycle through {', '.join(ids)}", ids) for ids in cycles
        ]

    # --- persistence ---

    def to_document(self) -> dict:
        doc = dict(self._extra)
        doc["schema_version"] = SCHEMA_VERSION
        for kind in NODE_KINDS:
            doc[_NODE_STORE_KEY[kind]] = self.nodes[kind]
        doc["links"] = [
            {
                "link_id": l.link_id,
                "from": list(l.from_ref),
                "to": list(l.to_ref),
                "edge_kind": l.edge_kind,
            }
            for l in self.links.values()
        ]
        doc["test_plans"] = self.test_plans
        doc["reports"] = self.reports
        doc["runs"] = self.runs
        return doc

    def save(self, path: Optional[str] = None) -> None:
        """Atomic write: temp file in the target directory, then rename."""
        target = path or self.path
        if target is None:
            raise ValueError("no project file path configured")
        with self._lock:
            document = self.to_document()
            directory = os.path.dirname(os.path.abspath(target)) or "."
            fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    json.dump(document, handle, indent=2, allow_nan=False, default=_json_default)
                    handle.write("\n")
                os.replace(tmp_path, target)
            except BaseException:
                if os.path.exists(tmp_path):
                    os.unlink(tmp_path)
                raise
        self.path = target

    @classmethod
    def load(cls, path: str) -> "ProjectStore":
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        store = cls(path)
        known = {"schema_version", "links", "test_plans", "reports", "runs"}
        known.update(_NODE_STORE_KEY.values())
        for kind in NODE_KINDS:
            store.nodes[kind] = dict(document.get(_NODE_STORE_KEY[kind], {}))
        for raw in document.get("links", []):
            trace_link = TraceLink(
                raw["link_id"], tuple(raw["from"]), tuple(raw["to"]), raw["edge_kind"]
            )
            store.links[trace_link.link_id] = trace_link
        store.test_plans = dict(document.get("test_plans", {}))
        store.reports = dict(document.get("reports", {}))
        store.runs = dict(document.get("runs", {}))
        store._extra = {k: v for k, v in document.items() if k not in known}
        return store


def _json_default(value):
    raise TypeError(f"not JSON-serializable: {value!r}")
