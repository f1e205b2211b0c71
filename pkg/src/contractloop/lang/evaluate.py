"""Three-valued evaluation of contract expressions, plus static queries
(free identifiers, comparison atoms).

Outcomes: Holds / Violated(witness) / Indeterminate(reason). Evaluation
failures (unbound identifier, type mismatch, division by zero) never raise;
they surface as Indeterminate so a contract-authoring bug is visible and
distinct from a logical violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional

from .ast import Binary, Call, Ident, Literal, MethodCall, Old, Result, ThisField, Unary

_MISSING = object()


@dataclass(frozen=True)
class Env:
    bindings: Dict[str, Any] = field(default_factory=dict)
    this_fields: Dict[str, Any] = field(default_factory=dict)
    old_fields: Optional[Dict[str, Any]] = None
    result: Any = _MISSING

    @property
    def has_result(self):
        return self.result is not _MISSING

    def snapshot(self):
        return Env(
            dict(self.bindings),
            dict(self.this_fields),
            None if self.old_fields is None else dict(self.old_fields),
            self.result,
        )


class EvalOutcome:
    __slots__ = ()


@dataclass(frozen=True)
class Holds(EvalOutcome):
    pass


@dataclass(frozen=True)
class Violated(EvalOutcome):
    witness: Env


@dataclass(frozen=True)
class Indeterminate(EvalOutcome):
    reason: str


HOLDS = Holds()


class _EvalProblem(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


def _kind(value):
    if value is None:
        return "null"
    if type(value) is bool:
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "decimal"
    if isinstance(value, str):
        return "text"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "map"
    raise _EvalProblem(f"type mismatch: unsupported value {value!r}")


def _is_numeric(value):
    return _kind(value) in ("int", "decimal")


def _require_bool(value, context):
    if type(value) is not bool:
        raise _EvalProblem(f"type mismatch: {context} expects boolean, got {_kind(value)}")
    return value


def _require_numeric(value, context):
    if not _is_numeric(value):
        raise _EvalProblem(f"type mismatch: {context} expects a number, got {_kind(value)}")
    return value


def _equal(a, b):
    ka, kb = _kind(a), _kind(b)
    if ka in ("int", "decimal") and kb in ("int", "decimal"):
        # Python compares int/float exactly regardless of magnitude;
        # NaN != NaN falls out of float semantics
        return a == b
    if ka != kb:
        return False
    if ka == "list":
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    if ka == "map":
        return a.keys() == b.keys() and all(_equal(a[k], b[k]) for k in a)
    return a == b


def _compare(op, a, b):
    if _is_numeric(a) and _is_numeric(b):
        pass
    elif _kind(a) == "text" and _kind(b) == "text":
        pass
    else:
        raise _EvalProblem(
            f"type mismatch: cannot order {_kind(a)} and {_kind(b)} with {op}"
        )
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _arith(op, a, b):
    _require_numeric(a, op)
    _require_numeric(b, op)
    try:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise _EvalProblem("division by zero")
        return a / b
    except OverflowError:
        raise _EvalProblem("type mismatch: arithmetic overflow") from None


def _builtin(name, args):
    if name == "is_null":
        return args[0] is None
    if name == "is_empty":
        if _kind(args[0]) not in ("text", "list", "map"):
            raise _EvalProblem(f"type mismatch: is_empty expects text/list/map, got {_kind(args[0])}")
        return len(args[0]) == 0
    if name == "is_nan":
        v = _require_numeric(args[0], "is_nan")
        return isinstance(v, float) and math.isnan(v)
    if name == "is_infinite":
        v = _require_numeric(args[0], "is_infinite")
        return isinstance(v, float) and math.isinf(v)
    if name == "is_finite":
        v = _require_numeric(args[0], "is_finite")
        return not isinstance(v, float) or math.isfinite(v)
    if name == "len":
        if _kind(args[0]) not in ("text", "list", "map"):
            raise _EvalProblem(f"type mismatch: len expects text/list/map, got {_kind(args[0])}")
        return len(args[0])
    if name == "abs":
        v = _require_numeric(args[0], "abs")
        return abs(v)
    if name in ("min", "max"):
        for v in args:
            _require_numeric(v, name)
        return min(args) if name == "min" else max(args)
    raise _EvalProblem(f"type mismatch: unknown builtin {name}")


def _eval(expr, env):
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Ident):
        if expr.name not in env.bindings:
            raise _EvalProblem(f"unbound identifier: {expr.name}")
        return env.bindings[expr.name]
    if isinstance(expr, ThisField):
        if expr.name not in env.this_fields:
            raise _EvalProblem(f"unbound identifier: this.{expr.name}")
        return env.this_fields[expr.name]
    if isinstance(expr, Result):
        if not env.has_result:
            raise _EvalProblem("unbound identifier: result (no return value in scope)")
        return env.result
    if isinstance(expr, Old):
        if env.old_fields is None:
            raise _EvalProblem("unbound identifier: old(...) (no pre-state in scope)")
        inner_env = Env(env.bindings, env.old_fields, env.old_fields, env.result)
        return _eval(expr.expr, inner_env)
    if isinstance(expr, Unary):
        value = _eval(expr.operand, env)
        if expr.op == "!":
            return not _require_bool(value, "!")
        return -_require_numeric(value, "unary -")
    if isinstance(expr, Binary):
        op = expr.op
        if op == "&&":
            left = _require_bool(_eval(expr.left, env), "&&")
            if not left:
                return False  # right side never evaluated
            return _require_bool(_eval(expr.right, env), "&&")
        if op == "||":
            left = _require_bool(_eval(expr.left, env), "||")
            if left:
                return True
            return _require_bool(_eval(expr.right, env), "||")
        left = _eval(expr.left, env)
        right = _eval(expr.right, env)
        if op == "==":
            return _equal(left, right)
        if op == "!=":
            return not _equal(left, right)
        if op in ("<", "<=", ">", ">="):
            return _compare(op, left, right)
        return _arith(op, left, right)
    if isinstance(expr, Call):
        args = [_eval(a, env) for a in expr.args]
        return _builtin(expr.name, args)
    if isinstance(expr, MethodCall):
        raise _EvalProblem("type mismatch: unnormalized method call")
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate(expr, env):
    """Evaluate a boolean contract expression to Holds/Violated/Indeterminate."""
    try:
        value = _eval(expr, env)
    except _EvalProblem as problem:
        return Indeterminate(problem.reason)
    if type(value) is not bool:
        return Indeterminate(f"type mismatch: contract evaluated to {_kind(value)}, not boolean")
    if value:
        return HOLDS
    return Violated(env.snapshot())


@dataclass(frozen=True)
class IdentifierUsage:
    plain: FrozenSet[str]
    this_fields: FrozenSet[str]
    uses_old: bool
    uses_result: bool


def free_identifiers(expr):
    plain = set()
    this_fields = set()
    flags = {"old": False, "result": False}

    def walk(node):
        if isinstance(node, Ident):
            plain.add(node.name)
        elif isinstance(node, ThisField):
            this_fields.add(node.name)
        elif isinstance(node, Result):
            flags["result"] = True
        elif isinstance(node, Old):
            flags["old"] = True
            walk(node.expr)
        elif isinstance(node, Unary):
            walk(node.operand)
        elif isinstance(node, Binary):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Call, MethodCall)):
            if isinstance(node, MethodCall):
                walk(node.receiver)
            for arg in node.args:
                walk(arg)

    walk(expr)
    return IdentifierUsage(frozenset(plain), frozenset(this_fields), flags["old"], flags["result"])


@dataclass(frozen=True)
class Atom:
    """One comparison between a parameter/field and a constant,
    normalized to identifier-on-left form."""

    name: str
    op: str  # "==", "!=", "<", "<=", ">", ">="
    value: Any
    is_this_field: bool = False


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def fold_constant(expr):
    """Value of an identifier-free subtree, or _MISSING when not foldable."""
    usage = free_identifiers(expr)
    if usage.plain or usage.this_fields or usage.uses_old or usage.uses_result:
        return _MISSING
    try:
        return _eval(expr, Env())
    except _EvalProblem:
        return _MISSING


def extract_atoms(expr):
    """Comparison atoms with one identifier side and one constant side;
    non-conforming comparisons are skipped."""
    atoms = []

    def walk(node):
        if isinstance(node, Binary):
            if node.op in ("==", "!=", "<", "<=", ">", ">="):
                for ident_side, const_side, flip in (
                    (node.left, node.right, False),
                    (node.right, node.left, True),
                ):
                    if isinstance(ident_side, (Ident, ThisField)):
                        value = fold_constant(const_side)
                        if value is not _MISSING:
                            op = _FLIP[node.op] if flip else node.op
                            name = ident_side.name
                            atoms.append(
                                Atom(name, op, value, isinstance(ident_side, ThisField))
                            )
                            break
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Unary):
            walk(node.operand)
        elif isinstance(node, Old):
            walk(node.expr)
        elif isinstance(node, Call):
            for arg in node.args:
                walk(arg)

    walk(expr)
    return atoms
