import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractloop.errors import (
    ClauseValidationError,
    IllegalTransitionError,
    UnknownContractError,
    UnknownTaskError,
)
from contractloop.registry import ContractRegistry
from contractloop.store import ProjectStore
from support import ACCOUNT_CLAUSES


@pytest.fixture
def store():
    return ProjectStore()


@pytest.fixture
def task_id(store):
    intent = store.add_node("intent", {"prompt_text": "Build an ATM Java project for me"})
    return store.add_node(
        "task",
        {
            "intent_id": intent,
            "title": "Account constructor",
            "description": "",
            "order_index": 0,
            "unit_kind": "constructor",
        },
    )


@pytest.fixture
def registry(store):
    return ContractRegistry(store)


class TestPropose:
    def test_table1_batch(self, registry, task_id):
        ids = registry.propose_texts(task_id, ACCOUNT_CLAUSES)
        assert len(ids) == 8
        assert all(
            registry.store.nodes["contract"][i]["status"] == "proposed" for i in ids
        )
        # specified_by trace links created
        edges = [l for l in registry.store.links.values() if l.edge_kind == "specified_by"]
        assert len(edges) == 8

    def test_empty_batch(self, registry, task_id):
        assert registry.propose_texts(task_id, []) == []

    def test_result_in_precondition_atomic_failure(self, registry, task_id):
        entries = list(ACCOUNT_CLAUSES[:2]) + [("precondition", "x", "result == 1")]
        with pytest.raises(ClauseValidationError):
            registry.propose_texts(task_id, entries)
        assert registry.store.nodes["contract"] == {}

    def test_unknown_task(self, registry):
        with pytest.raises(UnknownTaskError):
            registry.propose_texts("missing", ACCOUNT_CLAUSES)

    def test_constructor_rewrite_stamps_provenance(self, registry, task_id):
        ids = registry.propose_texts(task_id, [("precondition", "balance", "this.balance >= 0")])
        record = registry.store.nodes["contract"][ids[0]]
        assert record["provenance"] == "normalizer_rewritten"
        assert record["clause"]["normalized_text"] == "balance >= 0"


class TestReview:
    def test_approve(self, registry, task_id):
        (cid,) = registry.propose_texts(task_id, ACCOUNT_CLAUSES[:1])
        record = registry.review(cid, "approve", "matches intent")
        assert record["status"] == "approved"
        assert record["review_note"] == "matches intent"

    def test_reject_after_approve_illegal(self, registry, task_id):
        (cid,) = registry.propose_texts(task_id, ACCOUNT_CLAUSES[:1])
        registry.review(cid, "approve")
        with pytest.raises(IllegalTransitionError):
            registry.review(cid, "reject")

    def test_unknown_contract(self, registry):
        with pytest.raises(UnknownContractError):
            registry.review("missing", "approve")

    def test_revised_record_reviewable(self, registry, task_id):
        (cid,) = registry.propose_texts(task_id, [("precondition", "pin", "pin >= 0")])
        new_id = registry.revise(cid, "0 <= pin && pin <= 9999", "add upper bound")
        record = registry.review(new_id, "approve", "fix accepted")
        assert record["status"] == "approved"


class TestRevise:
    def test_revision_matches_table1_pin_row(self, registry, task_id):
        (cid,) = registry.propose_texts(task_id, [("precondition", "pin", "pin >= 0")])
        new_id = registry.revise(cid, "0 <= pin && pin <= 9999", "add upper bound")
        new_record = registry.store.nodes["contract"][new_id]
        assert new_record["clause"]["normalized_text"] == "0 <= pin && pin <= 9999"
        assert new_record["provenance"] == "human_authored"
        assert new_record["revision_of"] == cid
        assert registry.store.nodes["contract"][cid]["status"] == "revised"

    def test_parse_error_creates_nothing(self, registry, task_id):
        (cid,) = registry.propose_texts(task_id, [("precondition", "pin", "pin >= 0")])
        before = dict(registry.store.nodes["contract"])
        with pytest.raises(ClauseValidationError):
            registry.revise(cid, "pin >= &&")
        assert registry.store.nodes["contract"].keys() == before.keys()
        assert registry.store.nodes["contract"][cid]["status"] == "proposed"

    def test_chain_resolves_to_root(self, registry, task_id):
        (root,) = registry.propose_texts(task_id, [("precondition", "pin", "pin >= 0")])
        second = registry.revise(root, "pin >= 1")
        third = registry.revise(second, "pin >= 2")
        assert registry.revision_root(third) == root


class TestEffectiveContracts:
    def test_all_approved_ordered(self, registry, task_id):
        ids = registry.propose_texts(task_id, ACCOUNT_CLAUSES)
        for cid in ids:
            registry.review(cid, "approve")
        clauses = registry.effective_contracts(task_id)
        assert len(clauses) == 8
        kinds = [c.kind.value for c in clauses]
        assert kinds == ["precondition"] * 4 + ["postcondition"] * 4

    def test_unreviewed_invisible(self, registry, task_id):
        registry.propose_texts(task_id, ACCOUNT_CLAUSES)
        assert registry.effective_contracts(task_id) == []

    def test_rejected_excluded(self, registry, task_id):
        ids = registry.propose_texts(task_id, ACCOUNT_CLAUSES)
        for cid in ids[:-1]:
            registry.review(cid, "approve")
        registry.review(ids[-1], "reject", "too strict")
        assert len(registry.effective_contracts(task_id)) == 7


class TestLifecycleProperties:
    @given(st.integers(0, 100_000))
    @settings(max_examples=60, deadline=None)
    def test_random_operation_fuzzing_stays_in_lifecycle(self, seed):
        rng = random.Random(seed)
        store = ProjectStore()
        intent = store.add_node("intent", {"prompt_text": "p"})
        task = store.add_node(
            "task",
            {"intent_id": intent, "title": "t", "order_index": 0, "unit_kind": "method"},
        )
        registry = ContractRegistry(store)
        ids = registry.propose_texts(task, [("precondition", "pin", "pin >= 0")] * 3)
        valid_statuses = {"proposed", "approved", "rejected", "revised"}
        for _ in range(20):
            action = rng.randrange(3)
            target = rng.choice(ids)
            try:
                if action == 0:
                    registry.review(target, "approve")
                elif action == 1:
                    registry.review(target, "reject")
                else:
                    ids.append(registry.revise(target, "pin >= 0 && pin <= 9999"))
            except IllegalTransitionError:
                pass
            statuses = {store.nodes["contract"][i]["status"] for i in ids}
            assert statuses <= valid_statuses
            # gate soundness
            approved = {
                i for i, r in store.nodes["contract"].items() if r["status"] == "approved"
            }
            effective = registry.effective_contracts(task)
            effective_ids = {
                registry.contract_id_for_clause(c.clause_id) for c in effective
            }
            assert effective_ids <= approved

    def test_audit_round_trip(self, tmp_path):
        store = ProjectStore(str(tmp_path / "project.json"))
        intent = store.add_node("intent", {"prompt_text": "p"})
        task = store.add_node(
            "task",
            {"intent_id": intent, "title": "t", "order_index": 0, "unit_kind": "method"},
        )
        registry = ContractRegistry(store)
        (cid,) = registry.propose_texts(task, [("precondition", "pin", "pin >= 0")])
        registry.review(cid, "approve", "fine")
        store.save()
        loaded = ProjectStore.load(store.path)
        assert loaded.nodes["contract"][cid]["history"] == store.nodes["contract"][cid]["history"]
