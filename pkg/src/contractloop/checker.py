"""Evaluates contracts against call records, classifies each test case,
and assembles violation reports for the repair loop.

Environment construction per clause kind:
  preconditions   args as plain bindings
  postconditions  args + post_state as `this` + pre_state as old + result
                  (only when the call returned)
  invariants      post_state on exit, and pre_state on entry when present
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import EmptyReportError, SessionDeadError, UnitMismatchError
from .harness import CallRecord, Raised, Returned
from .ids import new_id
from .lang import ClauseKind, Env, EvalOutcome, Holds, Indeterminate, Violated, evaluate
from .values import encode_env

CLASSIFICATIONS = (
    "pass",
    "postcondition_violation",
    "invariant_violation",
    "missing_rejection",
    "unexpected_rejection",
    "indeterminate",
)

DEFAULT_WITNESS_LIMIT = 3
DEFAULT_BRIEF_BUDGET = 4000


@dataclass
class CheckVerdict:
    case_id: Optional[str]
    classification: str
    outcomes: List[Tuple[str, EvalOutcome]] = field(default_factory=list)
    args: Dict[str, object] = field(default_factory=dict)
    expectation: str = ""

    def violated_clause_ids(self):
        return [clause_id for clause_id, outcome in self.outcomes
                if isinstance(outcome, Violated)]

    def to_record(self):
        return {
            "case_id": self.case_id,
            "classification": self.classification,
            "expectation": self.expectation,
            "args": encode_env(self.args),
            "outcomes": [
                {"clause_id": clause_id, "outcome": _outcome_label(outcome),
                 "reason": outcome.reason if isinstance(outcome, Indeterminate) else None}
                for clause_id, outcome in self.outcomes
            ],
        }


def _outcome_label(outcome):
    if isinstance(outcome, Holds):
        return "holds"
    if isinstance(outcome, Violated):
        return "violated"
    return "indeterminate"


@dataclass
class ViolationReport:
    report_id: str
    task_id: str
    plan_id: str
    verdicts: List[CheckVerdict]  # failures only
    summary: Dict[str, int]
    n_cases: int
    n_passed: int
    incomplete: bool = False
    witness_limit: int = DEFAULT_WITNESS_LIMIT

    @property
    def failure_count(self):
        return len(self.verdicts)

    def to_record(self):
        return {
            "report_id": self.report_id,
            "task_id": self.task_id,
            "plan_id": self.plan_id,
            "summary": self.summary,
            "n_cases": self.n_cases,
            "n_passed": self.n_passed,
            "incomplete": self.incomplete,
            "witness_limit": self.witness_limit,
            "verdicts": [verdict.to_record() for verdict in self.verdicts],
        }


def check_call(record: CallRecord, clauses, expectation: str,
               case_id: Optional[str] = None, unit_name: Optional[str] = None) -> CheckVerdict:
    """Verdict for one executed case against the approved clause set."""
    if unit_name is not None and record.unit_name != unit_name:
        raise UnitMismatchError(
            f"call record is for {record.unit_name}, clauses are for {unit_name}"
        )
    preconditions = [c for c in clauses if c.kind is ClauseKind.PRECONDITION]
    postconditions = [c for c in clauses if c.kind is ClauseKind.POSTCONDITION]
    invariants = [c for c in clauses if c.kind is ClauseKind.INVARIANT]
    verdict = CheckVerdict(case_id, "pass", args=dict(record.args), expectation=expectation)

    if isinstance(record.outcome, Raised):
        if record.outcome.error_kind == "timeout":
            verdict.classification = "indeterminate"
        elif expectation == "must_be_rejected":
            # rejection expected and delivered; nothing further to check
            verdict.classification = "pass"
        else:
            verdict.classification = "unexpected_rejection"
        return verdict

    # the call returned
    returned: Returned = record.outcome
    post_env = Env(
        bindings=dict(record.args),
        this_fields=dict(returned.post_state),
        old_fields=dict(record.pre_state) if record.pre_state else None,
        result=returned.result,
    )
    if expectation == "must_be_rejected":
        verdict.classification = "missing_rejection"
        pre_env = Env(bindings=dict(record.args))
        for clause in preconditions:
            verdict.outcomes.append((clause.clause_id, evaluate(clause.expr, pre_env)))
        for clause in postconditions:
            verdict.outcomes.append((clause.clause_id, evaluate(clause.expr, post_env)))
        return verdict

    pre_env = Env(bindings=dict(record.args))
    for clause in preconditions:
        verdict.outcomes.append((clause.clause_id, evaluate(clause.expr, pre_env)))
    for clause in postconditions:
        verdict.outcomes.append((clause.clause_id, evaluate(clause.expr, post_env)))
    post_violated = {
        clause_id
        for clause_id, outcome in verdict.outcomes
        if isinstance(outcome, Violated)
        and clause_id in {c.clause_id for c in postconditions}
    }
    invariant_violated = False
    entry_env = Env(this_fields=dict(record.pre_state)) if record.pre_state else None
    exit_env = Env(this_fields=dict(returned.post_state))
    for clause in invariants:
        outcome = evaluate(clause.expr, exit_env)
        verdict.outcomes.append((clause.clause_id, outcome))
        if isinstance(outcome, Violated):
            invariant_violated = True
        if entry_env is not None:
            outcome = evaluate(clause.expr, entry_env)
            verdict.outcomes.append((clause.clause_id, outcome))
            if isinstance(outcome, Violated):
                invariant_violated = True

    if post_violated:
        verdict.classification = "postcondition_violation"
    elif invariant_violated:
        verdict.classification = "invariant_violation"
    elif any(isinstance(outcome, (Indeterminate, Violated)) for _, outcome in verdict.outcomes):
        # residual Violated here means a precondition failed on a case the
        # generator promised was valid: a generation bug, not a code bug
        verdict.classification = "indeterminate"
    else:
        verdict.classification = "pass"
    return verdict


def check_plan(plan, session, clauses, store=None, registry=None,
               witness_limit=DEFAULT_WITNESS_LIMIT) -> ViolationReport:
    """Execute every case in plan order and aggregate the failures.

    A session death mid-plan yields a partial report flagged incomplete.
    """
    failures = []
    summary = {}
    n_passed = 0
    n_run = 0
    incomplete = False
    for case in plan.cases:
        try:
            record = session.call(case.unit_name, case.args)
        except SessionDeadError:
            incomplete = True
            break
        n_run += 1
        verdict = check_call(record, clauses, case.expectation, case_id=case.case_id,
                             unit_name=plan.unit_name)
        if verdict.classification == "pass":
            n_passed += 1
        else:
            failures.append(verdict)
            summary[verdict.classification] = summary.get(verdict.classification, 0) + 1
    report = ViolationReport(
        report_id=new_id("rp"),
        task_id=plan.task_id,
        plan_id=plan.plan_id,
        verdicts=failures,
        summary=summary,
        n_cases=n_run,
        n_passed=n_passed,
        incomplete=incomplete,
        witness_limit=witness_limit,
    )
    if store is not None:
        _persist_report(report, store, registry)
    return report


def _persist_report(report, store, registry):
    store.reports[report.report_id] = report.to_record()
    if registry is None:
        return
    seen_pairs = set()
    for verdict in report.verdicts:
        failing = set(verdict.violated_clause_ids())
        for clause_id in sorted(failing):
            pair = (clause_id, verdict.case_id)
            if pair in seen_pairs:
                continue
            seen_pairs.add(pair)
            contract_id = registry.contract_id_for_clause(clause_id)
            if contract_id is None:
                continue
            violation_id = store.add_node(
                "violation",
                {
                    "report_id": report.report_id,
                    "case_id": verdict.case_id,
                    "clause_id": clause_id,
                    "classification": verdict.classification,
                    "witness_args": encode_env(verdict.args),
                },
            )
            store.link(("contract", contract_id), ("violation", violation_id), "violated_by")


def summarize_for_repair(report: ViolationReport, clause_lookup,
                         char_budget=DEFAULT_BRIEF_BUDGET):
    """Repair brief: per failing clause, its text, the failure class, and up
    to witness_limit witness argument sets. `clause_lookup` maps clause_id
    to a ContractClause (usually registry.clause_by_id).

    Returns (text, structured entries). Deterministic; when over the
    character budget, witnesses are dropped (largest pool first), clauses
    never.
    """
    if not report.verdicts:
        raise EmptyReportError("report has no failures to summarize")

    grouped = {}
    for verdict in report.verdicts:
        clause_ids = set(verdict.violated_clause_ids())
        if not clause_ids and verdict.classification == "unexpected_rejection":
            clause_ids = {None}  # rejection with no specific clause
        for clause_id in clause_ids:
            entry = grouped.setdefault(
                clause_id,
                {"clause_id": clause_id, "classification": verdict.classification,
                 "witnesses": []},
            )
            if len(entry["witnesses"]) < report.witness_limit:
                entry["witnesses"].append(verdict.args)

    entries = sorted(
        grouped.values(), key=lambda e: (e["classification"], e["clause_id"] or "")
    )
    for entry in entries:
        clause = clause_lookup(entry["clause_id"]) if entry["clause_id"] else None
        entry["clause_text"] = clause.normalized_text if clause else "(no specific clause)"
        entry["element"] = clause.element if clause else None
        entry["kind"] = clause.kind.value if clause else None

    def render():
        lines = ["Contract violations observed while testing the generated code:", ""]
        for entry in entries:
            lines.append(f"- [{entry['classification']}] {entry['clause_text']}")
            for witness in entry["witnesses"]:
                pairs = ", ".join(f"{k}={witness[k]!r}" for k in sorted(witness))
                lines.append(f"    failing input: {pairs}")
        return "\n".join(lines)

    text = render()
    while len(text) > char_budget and any(e["witnesses"] for e in entries):
        richest = max(enumerate(entries), key=lambda pair: (len(pair[1]["witnesses"]), pair[0]))
        richest[1]["witnesses"].pop()
        text = render()
    return text, entries
