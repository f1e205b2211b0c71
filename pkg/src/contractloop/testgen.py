"""Contract-derived test plans: precondition-satisfying inputs with
postcondition oracles, plus targeted precondition-violating inputs.

Generation is rejection sampling over boundary-enriched domains; it is a
pure function of (approved clause set, config), so identical configs give
identical plans. When 10,000 consecutive draws fail for one case the
generator gives up with SaturationError instead of looping forever.
"""

from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import SaturationError
from .ids import new_id
from .lang import ClauseKind, Env, Holds, Violated, evaluate, extract_atoms
from .values import encode_env

MAX_REJECTIONS = 10_000

_TEXT_ALPHABET = string.ascii_letters + string.digits + " _-."


@dataclass(frozen=True)
class DomainSpec:
    int_range: Tuple[int, int] = (-(10**6), 10**6)
    decimal_range: Tuple[float, float] = (-1e6, 1e6)
    decimal_specials: Tuple[float, ...] = (
        float("nan"),
        float("inf"),
        float("-inf"),
        -0.0,
    )
    text_length: Tuple[int, int] = (0, 32)

    def __post_init__(self):
        for lo, hi in (self.int_range, self.decimal_range, self.text_length):
            if lo > hi:
                raise ValueError(f"domain range inverted: {lo} > {hi}")


@dataclass
class TestCase:
    task_id: str
    unit_name: str
    args: Dict[str, object]
    expectation: str  # "must_satisfy_posts" | "must_be_rejected"
    seed: str
    target_clause_id: Optional[str] = None
    co_violation: bool = False
    case_id: Optional[str] = None

    def to_record(self):
        return {
            "case_id": self.case_id,
            "task_id": self.task_id,
            "unit_name": self.unit_name,
            "args": encode_env(self.args),
            "expectation": self.expectation,
            "target_clause_id": self.target_clause_id,
            "co_violation": self.co_violation,
            "seed": self.seed,
        }


@dataclass
class TestPlan:
    plan_id: str
    task_id: str
    unit_name: str
    cases: List[TestCase]
    generation_config: dict


def _float_key(value):
    return ("f", math.copysign(1.0, value), repr(value))


def _value_key(value):
    if isinstance(value, float):
        return _float_key(value)
    return (type(value).__name__, value)


def boundary_values(clauses, param: str, semantic_type: str, domain: DomainSpec = DomainSpec()):
    """Boundary candidates for one parameter: for each comparison atom
    (param cmp k) the constant and its immediate neighbors, plus the
    domain's special pool. Deduplicated, deterministic order."""
    candidates = []
    for clause in clauses:
        for atom in extract_atoms(clause.expr):
            if atom.name != param:
                continue
            k = atom.value
            if semantic_type == "int" and isinstance(k, int) and not isinstance(k, bool):
                candidates.extend([k - 1, k, k + 1])
            elif semantic_type == "decimal" and isinstance(k, (int, float)) and not isinstance(k, bool):
                k = float(k)
                candidates.extend(
                    [math.nextafter(k, -math.inf), k, math.nextafter(k, math.inf)]
                )
    if semantic_type == "decimal":
        candidates.extend(domain.decimal_specials)
    elif semantic_type == "text":
        candidates.append("")
    elif semantic_type == "bool":
        candidates.extend([True, False])
    seen = set()
    out = []
    for value in candidates:
        key = _value_key(value)
        if key not in seen:
            seen.add(key)
            out.append(value)
    return out


def _base_draw(rng, semantic_type, domain):
    if semantic_type == "int":
        return rng.randint(*domain.int_range)
    if semantic_type == "decimal":
        return rng.uniform(*domain.decimal_range)
    if semantic_type == "text":
        length = rng.randint(*domain.text_length)
        return "".join(rng.choice(_TEXT_ALPHABET) for _ in range(length))
    if semantic_type == "bool":
        return rng.random() < 0.5
    raise ValueError(f"unknown semantic type: {semantic_type}")


def _draw_args(rng, signature, boundaries, domain):
    args = {}
    for name, semantic_type in signature.params:
        pool = boundaries.get(name)
        if pool and rng.random() < 0.5:
            args[name] = rng.choice(pool)
        else:
            args[name] = _base_draw(rng, semantic_type, domain)
    return args


def _precondition_outcomes(clauses, args):
    env = Env(bindings=args)
    return [(clause, evaluate(clause.expr, env)) for clause in clauses]


def _boundary_pools(preconditions, signature, domain):
    return {
        name: boundary_values(preconditions, name, semantic_type, domain)
        for name, semantic_type in signature.params
    }


def generate_valid(signature, preconditions, task_id, n, seed, domain=DomainSpec()):
    """n cases whose args satisfy every approved precondition."""
    preconditions = [c for c in preconditions if c.kind is ClauseKind.PRECONDITION]
    boundaries = _boundary_pools(preconditions, signature, domain)
    cases = []
    for index in range(n):
        case_seed = f"{seed}:valid:{index}"
        rng = random.Random(case_seed)
        rejections: Dict[str, int] = {}
        for _ in range(MAX_REJECTIONS):
            args = _draw_args(rng, signature, boundaries, domain)
            outcomes = _precondition_outcomes(preconditions, args)
            if all(outcome == Holds() for _, outcome in outcomes):
                cases.append(
                    TestCase(task_id, signature.unit_name, args, "must_satisfy_posts", case_seed)
                )
                break
            for clause, outcome in outcomes:
                if outcome != Holds():
                    rejections[clause.clause_id] = rejections.get(clause.clause_id, 0) + 1
                    break
        else:
            worst = max(rejections, key=rejections.get)
            raise SaturationError(worst, MAX_REJECTIONS)
    return cases


def generate_violating(signature, preconditions, task_id, per_clause, seed, domain=DomainSpec()):
    """per_clause cases for each precondition c: c is violated while every
    other precondition holds. When that combination never turns up, the
    best draw violating c is emitted with a co-violation annotation."""
    preconditions = [c for c in preconditions if c.kind is ClauseKind.PRECONDITION]
    if not preconditions:
        raise ValueError("violating-case generation requires at least one approved precondition")
    boundaries = _boundary_pools(preconditions, signature, domain)
    cases = []
    for target in preconditions:
        others = [c for c in preconditions if c.clause_id != target.clause_id]
        for index in range(per_clause):
            # keyed by clause text, not clause id, so regenerated projects
            # with fresh ids still produce identical plans
            case_seed = f"{seed}:violating:{target.normalized_text}:{index}"
            rng = random.Random(case_seed)
            fallback = None
            for _ in range(MAX_REJECTIONS):
                args = _draw_args(rng, signature, boundaries, domain)
                target_outcome = evaluate(target.expr, Env(bindings=args))
                if not isinstance(target_outcome, Violated):
                    continue
                if all(
                    evaluate(c.expr, Env(bindings=args)) == Holds() for c in others
                ):
                    cases.append(
                        TestCase(
                            task_id,
                            signature.unit_name,
                            args,
                            "must_be_rejected",
                            case_seed,
                            target_clause_id=target.clause_id,
                        )
                    )
                    break
                if fallback is None:
                    fallback = args
            else:
                if fallback is None:
                    raise SaturationError(target.clause_id, MAX_REJECTIONS)
                cases.append(
                    TestCase(
                        task_id,
                        signature.unit_name,
                        fallback,
                        "must_be_rejected",
                        case_seed,
                        target_clause_id=target.clause_id,
                        co_violation=True,
                    )
                )
    return cases


@dataclass(frozen=True)
class GenerationConfig:
    n_valid: int = 50
    n_violating_per_clause: int = 5
    seed: int = 0

    def to_record(self):
        return {
            "n_valid": self.n_valid,
            "n_violating_per_clause": self.n_violating_per_clause,
            "seed": self.seed,
        }


def build_plan(store, registry, task_id, signature, config: GenerationConfig,
               domain=DomainSpec()) -> TestPlan:
    """Generate, persist, and trace-link a full plan for one task."""
    clauses = registry.effective_contracts(task_id)
    preconditions = [c for c in clauses if c.kind is ClauseKind.PRECONDITION]
    cases = generate_valid(signature, preconditions, task_id, config.n_valid, config.seed, domain)
    if preconditions and config.n_violating_per_clause > 0:
        cases.extend(
            generate_violating(
                signature, preconditions, task_id, config.n_violating_per_clause,
                config.seed, domain,
            )
        )
    plan = TestPlan(new_id("plan"), task_id, signature.unit_name, cases, config.to_record())
    for case in cases:
        case.case_id = store.add_node("test_case", {"task_id": task_id, "plan_id": plan.plan_id})
        store.nodes["test_case"][case.case_id].update(case.to_record())
    store.test_plans[plan.plan_id] = {
        "plan_id": plan.plan_id,
        "task_id": task_id,
        "unit_name": signature.unit_name,
        "generation_config": plan.generation_config,
        "case_ids": [case.case_id for case in cases],
    }
    # link every contract to the cases that exercise it: violating cases to
    # their target clause, valid cases to every approved clause
    for case in cases:
        if case.expectation == "must_be_rejected":
            contract_id = registry.contract_id_for_clause(case.target_clause_id)
            if contract_id:
                store.link(("contract", contract_id), ("test_case", case.case_id), "tested_by")
        else:
            for clause in clauses:
                contract_id = registry.contract_id_for_clause(clause.clause_id)
                if contract_id:
                    store.link(("contract", contract_id), ("test_case", case.case_id), "tested_by")
    return plan


def plan_from_store(store, registry, plan_id) -> TestPlan:
    from .values import decode_env

    record = store.test_plans[plan_id]
    cases = []
    for case_id in record["case_ids"]:
        node = store.nodes["test_case"][case_id]
        cases.append(
            TestCase(
                task_id=node["task_id"],
                unit_name=node["unit_name"],
                args=decode_env(node["args"]),
                expectation=node["expectation"],
                seed=node["seed"],
                target_clause_id=node.get("target_clause_id"),
                co_violation=node.get("co_violation", False),
                case_id=case_id,
            )
        )
    return TestPlan(plan_id, record["task_id"], record["unit_name"], cases,
                    record["generation_config"])


def export_plan(plan: TestPlan) -> dict:
    """Interchange-format document for external runners."""
    return {
        "plan_id": plan.plan_id,
        "task_id": plan.task_id,
        "unit_name": plan.unit_name,
        "generation_config": plan.generation_config,
        "cases": [case.to_record() for case in plan.cases],
    }
