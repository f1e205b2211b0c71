"""Contract records and the human validation lifecycle.

Status transitions: proposed -> approved | rejected | revised,
revised -> approved | rejected. Only approved records are visible to code
generation, test generation, and runtime checking. Rejected records stay
in the store; the feedback loop needs the record of what was rejected.
"""

from __future__ import annotations

import time
from typing import List, Optional

from .errors import (
    ClauseValidationError,
    IllegalTransitionError,
    UnknownContractError,
    UnknownTaskError,
)
from .lang import ContractClause, build_clause, clause_from_record, clause_to_record
from .store import ProjectStore

_TRANSITIONS = {
    ("proposed", "approved"),
    ("proposed", "rejected"),
    ("proposed", "revised"),
    ("revised", "approved"),
    ("revised", "rejected"),
    ("revised", "revised"),  # a revision may itself be revised again
}

PROVENANCES = ("llm_generated", "human_authored", "normalizer_rewritten")

_KIND_ORDER = {"precondition": 0, "postcondition": 1, "invariant": 2}


class ContractRegistry:
    def __init__(self, store: ProjectStore):
        self.store = store

    def _require_task(self, task_id):
        if task_id not in self.store.nodes["task"]:
            raise UnknownTaskError(f"no task with id {task_id}")
        return self.store.nodes["task"][task_id]

    def _require_record(self, contract_id):
        record = self.store.nodes["contract"].get(contract_id)
        if record is None:
            raise UnknownContractError(f"no contract with id {contract_id}")
        return record

    def propose(
        self, task_id: str, clauses: List[ContractClause], provenance: str = "llm_generated"
    ) -> List[str]:
        """Register a batch of clauses as proposed records; all or none."""
        task = self._require_task(task_id)
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance: {provenance}")
        for clause in clauses:
            if not isinstance(clause, ContractClause):
                raise ClauseValidationError(f"not a clause: {clause!r}")
        contract_ids = []
        for clause in clauses:
            effective_provenance = provenance
            if clause.rewritten_for_constructor:
                effective_provenance = "normalizer_rewritten"
            record = {
                "task_id": task_id,
                "clause": clause_to_record(clause),
                "status": "proposed",
                "review_note": None,
                "revision_of": None,
                "provenance": effective_provenance,
                "history": [
                    {"status": "proposed", "at": time.time(), "note": None}
                ],
            }
            contract_id = self.store.add_node("contract", record)
            self.store.link(("task", task_id), ("contract", contract_id), "specified_by")
            contract_ids.append(contract_id)
        del task
        return contract_ids

    def propose_texts(self, task_id, entries, provenance="llm_generated", dialect="java_like"):
        """Build clauses from (kind, element, text) triples and propose them.

        Parsing or validation failure in any entry aborts the whole batch
        before any record is created.
        """
        task = self._require_task(task_id)
        clauses = []
        for index, (kind, element, text) in enumerate(entries):
            try:
                clauses.append(
                    build_clause(kind, element, text, dialect=dialect, unit_kind=task["unit_kind"])
                )
            except ClauseValidationError:
                raise
            except Exception as error:
                raise ClauseValidationError(f"clause {index} ({element}): {error}") from error
        return self.propose(task_id, clauses, provenance)

    def review(self, contract_id: str, decision: str, note: Optional[str] = None) -> dict:
        if decision not in ("approve", "reject"):
            raise ValueError(f"decision must be approve or reject, got {decision!r}")
        record = self._require_record(contract_id)
        new_status = "approved" if decision == "approve" else "rejected"
        self._transition(contract_id, record, new_status, note)
        return record

    def _transition(self, contract_id, record, new_status, note):
        if (record["status"], new_status) not in _TRANSITIONS:
            raise IllegalTransitionError(
                f"contract {contract_id}: {record['status']} -> {new_status} is not allowed"
            )
        record["status"] = new_status
        record["review_note"] = note
        record["history"].append({"status": new_status, "at": time.time(), "note": note})

    def revise(self, contract_id: str, new_source_text: str, note: Optional[str] = None) -> str:
        """Create a replacement record; the original is marked revised and
        left otherwise untouched."""
        record = self._require_record(contract_id)
        task = self._require_task(record["task_id"])
        old_clause = clause_from_record(record["clause"])
        try:
            new_clause = build_clause(
                old_clause.kind,
                old_clause.element,
                new_source_text,
                unit_kind=task["unit_kind"],
            )
        except ClauseValidationError:
            raise
        except Exception as error:
            raise ClauseValidationError(f"revision text does not parse: {error}") from error
        self._transition(contract_id, record, "revised", note)
        new_record = {
            "task_id": record["task_id"],
            "clause": clause_to_record(new_clause),
            "status": "revised",
            "review_note": None,
            "revision_of": contract_id,
            "provenance": "human_authored",
            "history": [{"status": "revised", "at": time.time(), "note": note}],
        }
        new_id = self.store.add_node("contract", new_record)
        self.store.link(("task", record["task_id"]), ("contract", new_id), "specified_by")
        return new_id

    def revision_root(self, contract_id: str) -> str:
        record = self._require_record(contract_id)
        seen = {contract_id}
        while record["revision_of"]:
            parent = record["revision_of"]
            if parent in seen:
                raise IllegalTransitionError(f"revision cycle at {parent}")
            seen.add(parent)
            contract_id = parent
            record = self._require_record(parent)
        return contract_id

    def records_for_task(self, task_id: str, status: Optional[str] = None) -> List[tuple]:
        self._require_task(task_id)
        out = []
        for contract_id, record in self.store.nodes["contract"].items():
            if record["task_id"] == task_id and (status is None or record["status"] == status):
                out.append((contract_id, record))
        return out

    def effective_contracts(self, task_id: str) -> List[ContractClause]:
        """Approved clauses only, in (kind, element, clause_id) order."""
        approved = self.records_for_task(task_id, status="approved")
        clauses = [clause_from_record(record["clause"]) for _, record in approved]
        clauses.sort(
            key=lambda c: (_KIND_ORDER[c.kind.value], c.element, c.normalized_text, c.clause_id)
        )
        return clauses

    def clause_by_id(self, clause_id: str) -> Optional[ContractClause]:
        for record in self.store.nodes["contract"].values():
            if record["clause"]["clause_id"] == clause_id:
                return clause_from_record(record["clause"])
        return None

    def contract_id_for_clause(self, clause_id: str) -> Optional[str]:
        for contract_id, record in self.store.nodes["contract"].items():
            if record["clause"]["clause_id"] == clause_id:
                return contract_id
        return None
