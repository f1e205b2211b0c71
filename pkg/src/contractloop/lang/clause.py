"""Contract clauses: one precondition/postcondition/invariant bound to an
element of a code unit."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import ClauseValidationError
from .ast import Expr
from .evaluate import free_identifiers
from .normalize import normalize, rewrite_constructor_precondition
from .parser import parse
from .printer import pretty_print


class ClauseKind(str, enum.Enum):
    PRECONDITION = "precondition"
    POSTCONDITION = "postcondition"
    INVARIANT = "invariant"


@dataclass(frozen=True)
class ContractClause:
    clause_id: str
    kind: ClauseKind
    element: str
    expr: Expr
    source_text: str
    normalized_text: str
    rewritten_for_constructor: bool = False

    def __post_init__(self):
        usage = free_identifiers(self.expr)
        if self.kind is ClauseKind.PRECONDITION:
            if usage.uses_old:
                raise ClauseValidationError(
                    f"{self.clause_id}: old(...) is not allowed in a precondition"
                )
            if usage.uses_result:
                raise ClauseValidationError(
                    f"{self.clause_id}: result is not allowed in a precondition"
                )
        if self.kind is ClauseKind.INVARIANT:
            if usage.plain or usage.uses_old or usage.uses_result:
                raise ClauseValidationError(
                    f"{self.clause_id}: invariants may reference only this.-fields "
                    f"and literals (found {sorted(usage.plain) or 'old/result'})"
                )


def build_clause(kind, element, source_text, clause_id=None, dialect="java_like", unit_kind=None):
    """Normalize, parse, and validate one clause.

    For constructor preconditions, `this.X` is rewritten to the like-named
    parameter `X` (the object does not exist before construction); the
    rewrite is recorded on the clause.
    """
    from ..ids import new_id

    kind = ClauseKind(kind)
    normalized = normalize(source_text, dialect)
    expr = parse(normalized)
    rewritten = False
    if kind is ClauseKind.PRECONDITION and unit_kind == "constructor":
        expr, rewritten = rewrite_constructor_precondition(expr)
        if rewritten:
            normalized = pretty_print(expr)
    return ContractClause(
        clause_id=clause_id or new_id("cl"),
        kind=kind,
        element=element,
        expr=expr,
        source_text=source_text,
        normalized_text=normalized,
        rewritten_for_constructor=rewritten,
    )


def clause_to_record(clause):
    """Interchange-format record for one clause."""
    return {
        "clause_id": clause.clause_id,
        "kind": clause.kind.value,
        "element": clause.element,
        "source_text": clause.source_text,
        "normalized_text": clause.normalized_text,
        "rewritten_for_constructor": clause.rewritten_for_constructor,
    }


def clause_from_record(record):
    return ContractClause(
        clause_id=record["clause_id"],
        kind=ClauseKind(record["kind"]),
        element=record["element"],
        expr=parse(record["normalized_text"]),
        source_text=record["source_text"],
        normalized_text=record["normalized_text"],
        rewritten_for_constructor=record.get("rewritten_for_constructor", False),
    )
