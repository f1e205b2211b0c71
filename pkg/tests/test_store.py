import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractloop.errors import (
    DanglingRefError,
    KindMismatchError,
    UnknownNodeError,
    ValidationError,
)
from contractloop.store import ProjectStore, TraceLink
from contractloop.ids import new_id


@pytest.fixture
def store(tmp_path):
    return ProjectStore(str(tmp_path / "project.json"))


def seed_chain(store):
    """intent -> task -> contract -> test_case, contract -> violation."""
    intent = store.add_node("intent", {"prompt_text": "Build an ATM Java project for me"})
    task = store.add_node(
        "task",
        {
            "intent_id": intent,
            "title": "Account constructor",
            "description": "construct an account",
            "order_index": 0,
            "unit_kind": "constructor",
        },
    )
    contract = store.add_node("contract", {"task_id": task, "status": "approved"})
    case = store.add_node("test_case", {"task_id": task})
    violation = store.add_node("violation", {"clause_id": "c", "case_id": case})
    store.link(("intent", intent), ("task", task), "decomposes_to")
    store.link(("task", task), ("contract", contract), "specified_by")
    store.link(("contract", contract), ("test_case", case), "tested_by")
    store.link(("contract", contract), ("violation", violation), "violated_by")
    return intent, task, contract, case, violation


class TestAddNode:
    def test_intent(self, store):
        intent = store.add_node("intent", {"prompt_text": "Build an ATM Java project for me"})
        assert store.get_node("intent", intent)["prompt_text"].startswith("Build")

    def test_task_requires_existing_intent(self, store):
        with pytest.raises(ValidationError):
            store.add_node(
                "task",
                {"intent_id": "nope", "title": "t", "order_index": 0, "unit_kind": "method"},
            )

    def test_empty_title_rejected(self, store):
        intent = store.add_node("intent", {"prompt_text": "p"})
        with pytest.raises(ValidationError):
            store.add_node(
                "task",
                {"intent_id": intent, "title": "", "order_index": 0, "unit_kind": "method"},
            )

    def test_duplicate_order_index_rejected(self, store):
        intent = store.add_node("intent", {"prompt_text": "p"})
        store.add_node(
            "task", {"intent_id": intent, "title": "a", "order_index": 0, "unit_kind": "method"}
        )
        with pytest.raises(ValidationError):
            store.add_node(
                "task",
                {"intent_id": intent, "title": "b", "order_index": 0, "unit_kind": "method"},
            )

    def test_ids_are_time_ordered(self, store):
        first = store.add_node("intent", {"prompt_text": "a"})
        second = store.add_node("intent", {"prompt_text": "b"})
        assert first < second


class TestLink:
    def test_link_and_idempotence(self, store):
        intent = store.add_node("intent", {"prompt_text": "p"})
        task = store.add_node(
            "task", {"intent_id": intent, "title": "t", "order_index": 0, "unit_kind": "method"}
        )
        first = store.link(("intent", intent), ("task", task), "decomposes_to")
        second = store.link(("intent", intent), ("task", task), "decomposes_to")
        assert first == second
        assert len(store.links) == 1

    def test_kind_mismatch(self, store):
        intent, task, contract, _, _ = seed_chain(store)
        with pytest.raises(KindMismatchError):
            store.link(("contract", contract), ("task", task), "specified_by")

    def test_dangling(self, store):
        intent = store.add_node("intent", {"prompt_text": "p"})
        with pytest.raises(DanglingRefError):
            store.link(("intent", intent), ("task", "missing"), "decomposes_to")


class TestLineage:
    def test_violation_reaches_intent(self, store):
        intent, task, contract, case, violation = seed_chain(store)
        subgraph = store.lineage(("violation", violation))
        assert subgraph.node_ids() == {intent, task, contract, case, violation}

    def test_isolated_intent(self, store):
        intent = store.add_node("intent", {"prompt_text": "p"})
        subgraph = store.lineage(("intent", intent))
        assert subgraph.node_ids() == {intent}
        assert subgraph.links == []

    def test_unknown_node(self, store):
        with pytest.raises(UnknownNodeError):
            store.lineage(("intent", "missing"))

    def test_symmetry(self, store):
        intent, task, contract, case, violation = seed_chain(store)
        assert violation in store.lineage(("intent", intent)).node_ids()
        assert intent in store.lineage(("violation", violation)).node_ids()


class TestIntegrity:
    def test_clean_chain(self, store):
        seed_chain(store)
        assert store.check_integrity() == []

    def test_orphan_contract(self, store):
        store.add_node("contract", {"task_id": "t", "status": "approved"})
        defects = store.check_integrity()
        assert [d.code for d in defects] == ["orphan_contract"]

    def test_unapproved_contract_is_not_orphan(self, store):
        store.add_node("contract", {"task_id": "t", "status": "proposed"})
        assert store.check_integrity() == []

    def test_injected_cycle_detected(self, store):
        intent, task, *_ = seed_chain(store)
        # inject a reversed decomposes_to edge behind the API's back
        bogus = TraceLink(new_id("ln"), ("task", task), ("intent", intent), "decomposes_to")
        store.links[bogus.link_id] = bogus
        codes = {d.code for d in store.check_integrity()}
        assert "cycle" in codes

    def test_dangling_detected_after_manual_removal(self, store):
        intent, task, *_ = seed_chain(store)
        del store.nodes["task"][task]
        codes = {d.code for d in store.check_integrity()}
        assert "dangling" in codes

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_api_sequences_only_produce_orphan_defects(self, seed):
        rng = random.Random(seed)
        store = ProjectStore()
        intents, tasks, contracts = [], [], []
        for _ in range(rng.randrange(2, 12)):
            action = rng.randrange(4)
            try:
                if action == 0 or not intents:
                    intents.append(store.add_node("intent", {"prompt_text": "p"}))
                elif action == 1:
                    tasks.append(
                        store.add_node(
                            "task",
                            {
                                "intent_id": rng.choice(intents),
                                "title": "t",
                                "order_index": rng.randrange(100),
                                "unit_kind": "method",
                            },
                        )
                    )
                elif action == 2 and tasks:
                    contracts.append(
                        store.add_node(
                            "contract",
                            {"task_id": rng.choice(tasks), "status": rng.choice(["approved", "proposed"])},
                        )
                    )
                elif tasks and contracts:
                    store.link(
                        ("task", rng.choice(tasks)),
                        ("contract", rng.choice(contracts)),
                        "specified_by",
                    )
            except ValidationError:
                pass
            assert all(d.code == "orphan_contract" for d in store.check_integrity())


class TestPersistence:
    def test_round_trip(self, store, tmp_path):
        seed_chain(store)
        store.save()
        loaded = ProjectStore.load(store.path)
        assert loaded.nodes == store.nodes
        assert set(loaded.links) == set(store.links)
        assert loaded.check_integrity() == store.check_integrity()

    def test_unknown_keys_preserved(self, store, tmp_path):
        store.add_node("intent", {"prompt_text": "p"})
        store.save()
        import json

        with open(store.path) as handle:
            doc = json.load(handle)
        doc["x_custom_annotation"] = {"kept": True}
        with open(store.path, "w") as handle:
            json.dump(doc, handle)
        loaded = ProjectStore.load(store.path)
        loaded.save()
        with open(store.path) as handle:
            doc2 = json.load(handle)
        assert doc2["x_custom_annotation"] == {"kept": True}
        assert doc2["schema_version"] == 1
