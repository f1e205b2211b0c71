"""Canonical pretty-printer; output re-parses to a structurally equal tree."""

import json
import math

from .ast import Binary, Call, Ident, Literal, MethodCall, Old, Result, ThisField, Unary

_LEVEL = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
}
_UNARY_LEVEL = 6
_ATOM_LEVEL = 7

_NON_ASSOC = {"==", "!=", "<", "<=", ">", ">="}


def _literal_text(value):
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            # no source form exists; keep trees containing these unprintable
            raise ValueError("NaN/infinity literals have no canonical source form")
        return repr(value)
    return json.dumps(value)


def _render(expr):
    """Returns (text, level)."""
    if isinstance(expr, Literal):
        text = _literal_text(expr.value)
        # a bare negative number prints as unary minus
        return text, _ATOM_LEVEL
    if isinstance(expr, Ident):
        return expr.name, _ATOM_LEVEL
    if isinstance(expr, ThisField):
        return f"this.{expr.name}", _ATOM_LEVEL
    if isinstance(expr, Result):
        return "result", _ATOM_LEVEL
    if isinstance(expr, Old):
        inner, _ = _render(expr.expr)
        return f"old({inner})", _ATOM_LEVEL
    if isinstance(expr, Call):
        args = ", ".join(_render(a)[0] for a in expr.args)
        return f"{expr.name}({args})", _ATOM_LEVEL
    if isinstance(expr, Unary):
        text, level = _render(expr.operand)
        if level < _UNARY_LEVEL:
            text = f"({text})"
        return f"{expr.op}{text}", _UNARY_LEVEL
    if isinstance(expr, Binary):
        my_level = _LEVEL[expr.op]
        left_text, left_level = _render(expr.left)
        right_text, right_level = _render(expr.right)
        # left-associative: left child may sit at the same level,
        # right child must bind tighter; comparisons bind neither side equal
        left_min = my_level + 1 if expr.op in _NON_ASSOC else my_level
        if left_level < left_min:
            left_text = f"({left_text})"
        if right_level <= my_level:
            right_text = f"({right_text})"
        return f"{left_text} {expr.op} {right_text}", my_level
    if isinstance(expr, MethodCall):
        raise ValueError("method calls must be normalized before printing")
    raise TypeError(f"not an expression node: {expr!r}")


def pretty_print(expr):
    return _render(expr)[0]
