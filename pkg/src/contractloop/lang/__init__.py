"""Contract expression language: AST, parser, printer, normalizer, evaluator."""

from .ast import (
    BUILTIN_NAMES,
    Binary,
    Call,
    Expr,
    Ident,
    Literal,
    MethodCall,
    Old,
    Result,
    ThisField,
    Unary,
)
from .clause import ClauseKind, ContractClause, build_clause, clause_from_record, clause_to_record
from .evaluate import (
    Atom,
    Env,
    EvalOutcome,
    Holds,
    IdentifierUsage,
    Indeterminate,
    Violated,
    evaluate,
    extract_atoms,
    free_identifiers,
)
from .normalize import normalize, rewrite_constructor_precondition
from .parser import parse
from .printer import pretty_print

__all__ = [
    "Atom",
    "BUILTIN_NAMES",
    "Binary",
    "Call",
    "ClauseKind",
    "ContractClause",
    "Env",
    "EvalOutcome",
    "Expr",
    "Holds",
    "Ident",
    "IdentifierUsage",
    "Indeterminate",
    "Literal",
    "MethodCall",
    "Old",
    "Result",
    "ThisField",
    "Unary",
    "Violated",
    "build_clause",
    "clause_from_record",
    "clause_to_record",
    "evaluate",
    "extract_atoms",
    "free_identifiers",
    "normalize",
    "parse",
    "pretty_print",
    "rewrite_constructor_precondition",
]
