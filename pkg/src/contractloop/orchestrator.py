"""The closed-loop pipeline: decompose an intent into tasks, generate and
review contracts, generate code under those contracts, test it, and feed
violations back into repair until the budget runs out or the code converges.

One pipeline run per project at a time (lock file). The project file is
saved atomically at every phase boundary, so a crash at any boundary leaves
a loadable, integrity-clean project.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from .checker import check_plan, summarize_for_repair
from .errors import ContractLoopError, PipelineError, ProjectLockedError
from .gateway import (
    CodeArtifact,
    PromptRequest,
    complete_structured,
    contracts_block,
    render_prompt,
)
from .harness import DEFAULT_DEADLINE, descriptor_from_record, descriptor_to_record, spawn
from .ids import new_id
from .registry import ContractRegistry
from .store import ProjectStore
from .testgen import GenerationConfig, build_plan

PHASES = ("decompose", "contract_gen", "review_wait", "codegen", "testgen", "verify", "repair")

TERMINAL_STATUSES = ("converged", "budget_exhausted", "aborted", "degraded_no_contracts")

LOCK_FILENAME = ".pipeline.lock"
PROJECT_FILENAME = "project.json"


@dataclass
class PipelineConfig:
    provider: object
    project_dir: str
    max_repair_iterations: int = 2
    testgen: GenerationConfig = field(default_factory=GenerationConfig)
    auto_approve: bool = False
    deadline: float = DEFAULT_DEADLINE

    def __post_init__(self):
        if self.max_repair_iterations < 0:
            raise ValueError("max_repair_iterations must be >= 0")


@dataclass
class PipelineRun:
    run_id: str
    phases: List[dict] = field(default_factory=list)
    terminal_status: Optional[str] = None
    rendered_prompts: List[Dict[str, str]] = field(default_factory=list)
    report_ids: List[str] = field(default_factory=list)

    def phase_names(self):
        return [entry["phase"] for entry in self.phases]

    def to_record(self):
        return {
            "run_id": self.run_id,
            "phases": self.phases,
            "terminal_status": self.terminal_status,
            "report_ids": self.report_ids,
        }


def project_file(project_dir: str) -> str:
    return os.path.join(project_dir, PROJECT_FILENAME)


def open_project(project_dir: str) -> ProjectStore:
    path = project_file(project_dir)
    if os.path.exists(path):
        return ProjectStore.load(path)
    os.makedirs(project_dir, exist_ok=True)
    store = ProjectStore(path)
    return store


class _ProjectLock:
    def __init__(self, project_dir):
        self.path = os.path.join(project_dir, LOCK_FILENAME)

    def __enter__(self):
        os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ProjectLockedError(
                f"another pipeline run holds {self.path}; remove it if stale"
            ) from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info):
        try:
            os.unlink(self.path)
        except FileNotFoundError:
            pass


def run_pipeline(
    intent_text: str,
    config: PipelineConfig,
    review_callback: Optional[Callable] = None,
    phase_hook: Optional[Callable[[str], None]] = None,
    run_id: Optional[str] = None,
) -> PipelineRun:
    """Execute the full loop for one intent.

    review_callback(registry, contract_ids) performs the human review when
    auto_approve is off; with neither, unreviewed contracts abort the run.
    phase_hook(phase_name) fires after each phase's state has been saved.
    run_id lets an asynchronous caller pre-allocate the id it will poll.
    """
    with _ProjectLock(config.project_dir):
        store = open_project(config.project_dir)
        registry = ContractRegistry(store)
        run = PipelineRun(run_id=run_id or new_id("run"))
        store.runs[run.run_id] = run.to_record()

        def phase(name, fn):
            entry = {"phase": name, "started": time.time(), "finished": None, "outcome": None}
            run.phases.append(entry)
            try:
                result = fn()
            except ContractLoopError as error:
                entry["outcome"] = f"error: {error}"
                entry["finished"] = time.time()
                run.terminal_status = "aborted"
                _checkpoint(store, run, phase_hook, name)
                raise PipelineError(name, error) from error
            entry["outcome"] = "ok"
            entry["finished"] = time.time()
            _checkpoint(store, run, phase_hook, name)
            return result

        def record_prompt(request):
            prompt = render_prompt(request)
            run.rendered_prompts.append({"purpose": request.purpose, "prompt": prompt})
            return prompt

        # decompose
        def do_decompose():
            intent_id = store.add_node("intent", {"prompt_text": intent_text})
            request = PromptRequest("decompose_intent", variables={"intent": intent_text})
            record_prompt(request)
            task_list = complete_structured(config.provider, request)
            task_ids = []
            for index, task in enumerate(task_list.tasks):
                task_id = store.add_node(
                    "task",
                    {
                        "intent_id": intent_id,
                        "title": task["title"],
                        "description": task["description"],
                        "unit_kind": task["unit_kind"],
                        "order_index": index,
                    },
                )
                store.link(("intent", intent_id), ("task", task_id), "decomposes_to")
                task_ids.append(task_id)
            return intent_id, task_ids

        intent_id, task_ids = phase("decompose", do_decompose)

        all_converged = True
        any_degraded = False
        for task_id in task_ids:
            task = store.get_node("task", task_id)

            # contract_gen
            def do_contracts():
                request = PromptRequest(
                    "generate_contracts",
                    variables={"task_title": task["title"],
                               "signature": task["description"]},
                )
                record_prompt(request)
                clause_list = complete_structured(config.provider, request)
                return registry.propose_texts(
                    task_id,
                    [(c["kind"], c["element"], c["contract_text"])
                     for c in clause_list.clauses],
                )

            contract_ids = phase("contract_gen", do_contracts)

            # review_wait
            def do_review():
                if config.auto_approve:
                    for contract_id in contract_ids:
                        registry.review(contract_id, "approve", note="auto-approved")
                elif review_callback is not None:
                    review_callback(registry, contract_ids)
                pending = registry.records_for_task(task_id, status="proposed")
                if pending:
                    raise PipelineError(
                        "review_wait",
                        ContractLoopError(f"{len(pending)} contracts still unreviewed"),
                    )

            try:
                phase("review_wait", do_review)
            except PipelineError:
                run.terminal_status = "aborted"
                _checkpoint(store, run, phase_hook, "review_wait")
                return run

            clauses = registry.effective_contracts(task_id)
            degraded = not clauses
            if degraded:
                any_degraded = True

            # codegen
            def do_codegen():
                request = PromptRequest(
                    "generate_code",
                    variables={
                        "task_title": task["title"],
                        "signature": task["description"],
                        "contracts_block": contracts_block(clauses),
                    },
                )
                record_prompt(request)
                artifact = complete_structured(config.provider, request)
                return _store_artifact(store, task_id, artifact)

            code_unit_id, descriptor = phase("codegen", do_codegen)

            # testgen: with no approved contracts there is nothing to test
            # against, so the plan is empty and verify degenerates
            def do_testgen():
                testgen_config = config.testgen
                if degraded:
                    testgen_config = GenerationConfig(
                        n_valid=0, n_violating_per_clause=0, seed=config.testgen.seed
                    )
                signature = descriptor.units[0]
                return build_plan(store, registry, task_id, signature, testgen_config)

            plan = phase("testgen", do_testgen)

            # verify, then repair while failures and budget remain
            def do_verify(active_descriptor):
                with spawn(active_descriptor, deadline=config.deadline) as session:
                    report = check_plan(plan, session, clauses, store=store, registry=registry)
                run.report_ids.append(report.report_id)
                return report

            report = phase("verify", lambda: do_verify(descriptor))
            repairs_done = 0
            while report.failure_count and repairs_done < config.max_repair_iterations:
                def do_repair():
                    brief, _ = summarize_for_repair(report, registry.clause_by_id)
                    request = PromptRequest(
                        "repair_code",
                        variables={
                            "task_title": task["title"],
                            "contracts_block": contracts_block(clauses),
                            "violation_report": brief,
                        },
                    )
                    record_prompt(request)
                    artifact = complete_structured(config.provider, request)
                    return _store_artifact(store, task_id, artifact)

                _, descriptor = phase("repair", do_repair)
                repairs_done += 1
                report = phase("verify", lambda: do_verify(descriptor))

            if report.failure_count:
                all_converged = False

        if any_degraded:
            run.terminal_status = "degraded_no_contracts"
        elif all_converged:
            run.terminal_status = "converged"
        else:
            run.terminal_status = "budget_exhausted"
        _checkpoint(store, run, phase_hook, "terminal")
        return run


def _store_artifact(store, task_id, artifact: CodeArtifact):
    descriptor = descriptor_from_record(artifact.descriptor)
    code_unit_id = store.add_node(
        "code_unit",
        {
            "task_id": task_id,
            "descriptor": descriptor_to_record(descriptor),
            "source": artifact.source,
        },
    )
    store.link(("task", task_id), ("code_unit", code_unit_id), "implemented_by")
    return code_unit_id, descriptor


def _checkpoint(store, run, phase_hook, phase_name):
    store.runs[run.run_id] = run.to_record()
    store.save()
    if phase_hook is not None:
        phase_hook(phase_name)
