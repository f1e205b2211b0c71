"""Command-line interface.

Exit codes (stable, for CI):
  0  success
  1  unexpected internal error
  2  usage error (bad flags/arguments)
  3  contract violations found by `verify`
  4  parse or validation failure (bad contract text, bad payload)
  5  provider/transport failure (network, exhausted mock script)
  6  project locked by another pipeline run
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import checker, orchestrator, testgen
from .errors import (
    ClauseValidationError,
    ContractLoopError,
    ExprSyntaxError,
    NoPayloadError,
    NormalizationError,
    ProjectLockedError,
    SchemaError,
    ScriptExhaustedError,
    TransportError,
    ValidationError,
)
from .gateway import (
    HttpProvider,
    MockScriptProvider,
    PromptRequest,
    complete_structured,
    contracts_block,
)
from .harness import descriptor_from_record, reference_subject, spawn
from .registry import ContractRegistry
from .store import ProjectStore

EXIT_VIOLATIONS = 3
EXIT_INVALID = 4
EXIT_PROVIDER = 5
EXIT_LOCKED = 6

_USAGE_ERRORS = (
    ExprSyntaxError,
    NormalizationError,
    ClauseValidationError,
    ValidationError,
    SchemaError,
    NoPayloadError,
)
_PROVIDER_ERRORS = (TransportError, ScriptExhaustedError, TimeoutError)


def _fail(error):
    click.echo(f"error: {error}", err=True)
    if isinstance(error, ProjectLockedError):
        sys.exit(EXIT_LOCKED)
    if isinstance(error, _PROVIDER_ERRORS):
        sys.exit(EXIT_PROVIDER)
    if isinstance(error, _USAGE_ERRORS):
        sys.exit(EXIT_INVALID)
    sys.exit(1)


class Context:
    def __init__(self, project_dir, provider_spec, seed):
        self.project_dir = project_dir
        self.provider_spec = provider_spec
        self.seed = seed
        self._store = None

    @property
    def store(self) -> ProjectStore:
        if self._store is None:
            path = orchestrator.project_file(self.project_dir)
            if not os.path.exists(path):
                raise ValidationError(
                    f"no project at {path}; run `contractloop init` first"
                )
            self._store = ProjectStore.load(path)
        return self._store

    @property
    def registry(self) -> ContractRegistry:
        return ContractRegistry(self.store)

    def provider(self):
        spec = self.provider_spec
        if spec is None:
            raise ValidationError("this command needs --provider (mock:<dir> or live)")
        if spec.startswith("mock:"):
            return MockScriptProvider(spec[len("mock:"):])
        if spec == "live":
            base_url = os.environ.get("CONTRACTLOOP_BASE_URL")
            api_key = os.environ.get("CONTRACTLOOP_API_KEY")
            model = os.environ.get("CONTRACTLOOP_MODEL")
            if not (base_url and api_key and model):
                raise ValidationError(
                    "live provider needs CONTRACTLOOP_BASE_URL, CONTRACTLOOP_API_KEY, "
                    "and CONTRACTLOOP_MODEL in the environment"
                )
            return HttpProvider(base_url, api_key, model)
        raise ValidationError(f"unknown provider spec: {spec}")

    def resolve_task(self, ref):
        tasks = self.store.nodes["task"]
        if ref in tasks:
            return ref
        matches = [
            task_id
            for task_id, task in tasks.items()
            if ref.lower() in task["title"].lower().replace(" ", "-")
            or ref.lower() in task["title"].lower()
        ]
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise ValidationError(f"no task matches {ref!r}")
        raise ValidationError(f"task reference {ref!r} is ambiguous: {matches}")


@click.group()
@click.option("--project", "project_dir", default=".", show_default=True,
              help="Project directory containing project.json.")
@click.option("--provider", "provider_spec", default=None,
              help="Provider: mock:<script-dir> or live (env-configured).")
@click.option("--seed", default=0, show_default=True, type=int,
              help="Seed for test generation.")
@click.pass_context
def main(ctx, project_dir, provider_spec, seed):
    """Contract-driven orchestration for LLM-assisted code generation."""
    ctx.obj = Context(project_dir, provider_spec, seed)


@main.command()
@click.argument("directory", required=False)
@click.pass_obj
def init(obj, directory):
    """Create an empty project skeleton."""
    target = directory or obj.project_dir
    path = orchestrator.project_file(target)
    if os.path.exists(path):
        _fail(ValidationError(f"project already exists at {path}"))
    store = orchestrator.open_project(target)
    store.save()
    click.echo(f"initialized empty project at {path}")


@main.command()
@click.argument("prompt")
@click.pass_obj
def decompose(obj, prompt):
    """Split an intent prompt into ordered tasks."""
    try:
        provider = obj.provider()
        store = obj.store
        intent_id = store.add_node("intent", {"prompt_text": prompt})
        request = PromptRequest("decompose_intent", variables={"intent": prompt})
        task_list = complete_structured(provider, request)
        for index, task in enumerate(task_list.tasks):
            task_id = store.add_node(
                "task",
                {"intent_id": intent_id, "title": task["title"],
                 "description": task["description"], "unit_kind": task["unit_kind"],
                 "order_index": index},
            )
            store.link(("intent", intent_id), ("task", task_id), "decomposes_to")
            click.echo(f"{task_id}  {task['title']}")
        store.save()
    except ContractLoopError as error:
        _fail(error)


@main.group()
def contracts():
    """Generate and review contract clauses."""


@contracts.command("generate")
@click.argument("task_ref")
@click.pass_obj
def contracts_generate(obj, task_ref):
    """Propose contracts for a task via the provider."""
    try:
        provider = obj.provider()
        store = obj.store
        task_id = obj.resolve_task(task_ref)
        task = store.get_node("task", task_id)
        request = PromptRequest(
            "generate_contracts",
            variables={"task_title": task["title"], "signature": task["description"]},
        )
        clause_list = complete_structured(provider, request)
        contract_ids = obj.registry.propose_texts(
            task_id,
            [(c["kind"], c["element"], c["contract_text"]) for c in clause_list.clauses],
        )
        store.save()
        for contract_id in contract_ids:
            record = store.get_node("contract", contract_id)
            clause = record["clause"]
            click.echo(f"{contract_id}  {clause['kind']} [{clause['element']}]: "
                       f"{clause['normalized_text']}")
    except ContractLoopError as error:
        _fail(error)


@contracts.command("review")
@click.pass_obj
def contracts_review(obj):
    """Interactively review proposed contracts: a(pprove)/r(eject)/e(dit)."""
    try:
        store = obj.store
        registry = obj.registry
        pending = [
            (contract_id, record)
            for contract_id, record in store.nodes["contract"].items()
            if record["status"] in ("proposed", "revised") and _is_latest(store, contract_id)
        ]
        if not pending:
            click.echo("no contracts awaiting review")
            return
        for contract_id, record in pending:
            clause = record["clause"]
            task = store.get_node("task", record["task_id"])
            click.echo(f"\ntask: {task['title']}")
            click.echo(f"{clause['kind']} [{clause['element']}]: {clause['normalized_text']}")
            while True:
                choice = click.prompt("approve/reject/edit [a/r/e]",
                                      type=click.Choice(["a", "r", "e"]))
                if choice == "a":
                    registry.review(contract_id, "approve")
                    break
                if choice == "r":
                    note = click.prompt("rejection note", default="", show_default=False)
                    registry.review(contract_id, "reject", note=note or None)
                    break
                new_text = click.prompt("new contract text")
                try:
                    new_id = registry.revise(contract_id, new_text)
                except ClauseValidationError as error:
                    click.echo(f"  does not parse: {error}")
                    continue
                registry.review(new_id, "approve")
                break
        store.save()
        click.echo(f"\nreviewed {len(pending)} contracts")
    except ContractLoopError as error:
        _fail(error)


def _is_latest(store, contract_id):
    return not any(
        record.get("revision_of") == contract_id
        for record in store.nodes["contract"].values()
    )


@main.command()
@click.argument("task_ref")
@click.pass_obj
def codegen(obj, task_ref):
    """Generate code for a task under its approved contracts."""
    try:
        provider = obj.provider()
        store = obj.store
        task_id = obj.resolve_task(task_ref)
        task = store.get_node("task", task_id)
        clauses = obj.registry.effective_contracts(task_id)
        request = PromptRequest(
            "generate_code",
            variables={"task_title": task["title"], "signature": task["description"],
                       "contracts_block": contracts_block(clauses)},
        )
        artifact = complete_structured(provider, request)
        code_unit_id, _ = orchestrator._store_artifact(store, task_id, artifact)
        store.save()
        click.echo(f"stored code unit {code_unit_id}")
    except ContractLoopError as error:
        _fail(error)


@main.command("testgen")
@click.argument("task_ref")
@click.option("--n-valid", default=50, show_default=True, type=int)
@click.option("--n-violating", default=5, show_default=True, type=int,
              help="Violating cases per precondition clause.")
@click.pass_obj
def testgen_command(obj, task_ref, n_valid, n_violating):
    """Build a contract-derived test plan for a task."""
    try:
        store = obj.store
        task_id = obj.resolve_task(task_ref)
        signature = _task_signature(store, task_id)
        config = testgen.GenerationConfig(
            n_valid=n_valid, n_violating_per_clause=n_violating, seed=obj.seed
        )
        plan = testgen.build_plan(store, obj.registry, task_id, signature, config)
        store.save()
        click.echo(f"plan {plan.plan_id}: {len(plan.cases)} cases")
    except ContractLoopError as error:
        _fail(error)


def _task_signature(store, task_id):
    descriptor = _latest_descriptor(store, task_id)
    if descriptor is None:
        raise ValidationError(
            f"task {task_id} has no code unit yet; run codegen (or verify --variant) first"
        )
    return descriptor.units[0]


def _latest_descriptor(store, task_id):
    units = [
        (code_unit_id, record)
        for code_unit_id, record in store.nodes["code_unit"].items()
        if record["task_id"] == task_id
    ]
    if not units:
        return None
    _, record = max(units)  # ids are time-ordered
    return descriptor_from_record(record["descriptor"])


def _latest_plan(store, registry, task_id):
    plans = [plan_id for plan_id, record in store.test_plans.items()
             if record["task_id"] == task_id]
    if not plans:
        raise ValidationError(f"task {task_id} has no test plan; run testgen first")
    return testgen.plan_from_store(store, registry, max(plans))


@main.command()
@click.argument("task_ref")
@click.option("--variant", default=None,
              help="Subject: buggy, fixed, or an external launch command. "
                   "Defaults to the task's latest generated code unit.")
@click.pass_obj
def verify(obj, task_ref, variant):
    """Run the task's test plan against a subject; exit 3 on violations."""
    try:
        store = obj.store
        registry = obj.registry
        task_id = obj.resolve_task(task_ref)
        plan = _latest_plan(store, registry, task_id)
        clauses = registry.effective_contracts(task_id)
        descriptor = _verify_descriptor(store, task_id, variant)
        with spawn(descriptor) as session:
            report = checker.check_plan(plan, session, clauses, store=store,
                                        registry=registry)
        store.save()
        _print_report(report, registry)
        if report.failure_count:
            sys.exit(EXIT_VIOLATIONS)
    except ContractLoopError as error:
        _fail(error)


def _verify_descriptor(store, task_id, variant):
    if variant in ("buggy", "fixed"):
        return reference_subject(variant)
    if variant:
        base = _latest_descriptor(store, task_id) or reference_subject("fixed")
        return descriptor_from_record(
            {"subject_id": f"external-{task_id}",
             "launch_command": variant.split(),
             "units": [
                 {"unit_name": u.unit_name, "unit_kind": u.unit_kind,
                  "params": [list(p) for p in u.params],
                  "observable_fields": [list(f) for f in u.observable_fields]}
                 for u in base.units
             ]}
        )
    descriptor = _latest_descriptor(store, task_id)
    if descriptor is None:
        raise ValidationError(f"task {task_id} has no code unit; pass --variant")
    return descriptor


def _print_report(report, registry):
    click.echo(f"cases run: {report.n_cases}   passed: {report.n_passed}   "
               f"failed: {report.failure_count}"
               + ("   (incomplete)" if report.incomplete else ""))
    if not report.failure_count:
        return
    click.echo(f"{'classification':<26} {'case':<32} clause")
    for verdict in report.verdicts:
        clause_ids = verdict.violated_clause_ids() or [None]
        for clause_id in clause_ids:
            clause = registry.clause_by_id(clause_id) if clause_id else None
            text = clause.normalized_text if clause else "-"
            click.echo(f"{verdict.classification:<26} {str(verdict.case_id):<32} {text}")


@main.command()
@click.argument("prompt")
@click.option("--auto-approve", is_flag=True,
              help="Approve every proposed contract without interactive review.")
@click.option("--max-repair", default=2, show_default=True, type=int)
@click.option("--n-valid", default=50, show_default=True, type=int)
@click.option("--n-violating", default=5, show_default=True, type=int)
@click.pass_obj
def loop(obj, prompt, auto_approve, max_repair, n_valid, n_violating):
    """Run the full closed loop: decompose, contracts, review, codegen,
    testgen, verify, repair."""
    try:
        config = orchestrator.PipelineConfig(
            provider=obj.provider(),
            project_dir=obj.project_dir,
            max_repair_iterations=max_repair,
            testgen=testgen.GenerationConfig(
                n_valid=n_valid, n_violating_per_clause=n_violating, seed=obj.seed
            ),
            auto_approve=auto_approve,
        )
        callback = None if auto_approve else _interactive_review
        run = orchestrator.run_pipeline(prompt, config, review_callback=callback)
        for entry in run.phases:
            click.echo(f"{entry['phase']:<14} {entry['outcome']}")
        click.echo(f"terminal status: {run.terminal_status}")
        if run.terminal_status not in ("converged", "degraded_no_contracts"):
            sys.exit(EXIT_VIOLATIONS if run.terminal_status == "budget_exhausted" else 1)
    except ContractLoopError as error:
        _fail(error)


def _interactive_review(registry, contract_ids):
    for contract_id in contract_ids:
        record = registry.store.get_node("contract", contract_id)
        clause = record["clause"]
        click.echo(f"{clause['kind']} [{clause['element']}]: {clause['normalized_text']}")
        choice = click.prompt("approve/reject [a/r]", type=click.Choice(["a", "r"]))
        registry.review(contract_id, "approve" if choice == "a" else "reject")


@main.command()
@click.argument("task_ref")
@click.option("--json", "as_json", is_flag=True, help="Print the raw report document.")
@click.pass_obj
def report(obj, task_ref, as_json):
    """Print the latest violation report for a task."""
    try:
        store = obj.store
        task_id = obj.resolve_task(task_ref)
        reports = {report_id: record for report_id, record in store.reports.items()
                   if record["task_id"] == task_id}
        if not reports:
            click.echo("no reports for this task")
            return
        latest = reports[max(reports)]
        if as_json:
            click.echo(json.dumps(latest, indent=2))
            return
        click.echo(f"report {latest['report_id']}  cases: {latest['n_cases']}  "
                   f"passed: {latest['n_passed']}")
        for classification, count in sorted(latest["summary"].items()):
            click.echo(f"  {classification}: {count}")
    except ContractLoopError as error:
        _fail(error)


@main.command()
@click.option("--port", default=8321, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(obj, port, host):
    """Serve the HTTP API for the review UI."""
    try:
        import uvicorn

        from .service import create_app

        app = create_app(obj.project_dir, provider_spec=obj.provider_spec,
                         seed=obj.seed)
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except ContractLoopError as error:
        _fail(error)


if __name__ == "__main__":
    main()
