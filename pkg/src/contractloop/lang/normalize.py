"""Rewrites Java-flavored contract text into the canonical dialect.

Supported idiom table:
    x != null            ->  !is_null(x)
    x == null            ->  is_null(x)
    x.isEmpty()          ->  is_empty(x)
    x.length() / x.size()->  len(x)
    Double.isNaN(x)      ->  is_nan(x)
    Double.isInfinite(x) ->  is_infinite(x)
    Double.isFinite(x)   ->  is_finite(x)

Anything else that only exists in the Java dialect (arbitrary method
calls) raises NormalizationError naming the idiom.
"""

from ..errors import NormalizationError
from .ast import Binary, Call, Ident, Literal, MethodCall, Old, ThisField, Unary
from .parser import parse
from .printer import pretty_print

_STATIC_RECEIVERS = {"Double", "Float"}
_STATIC_METHODS = {"isNaN": "is_nan", "isInfinite": "is_infinite", "isFinite": "is_finite"}
_INSTANCE_METHODS = {"isEmpty": "is_empty", "length": "len", "size": "len"}


def _is_null_literal(expr):
    return isinstance(expr, Literal) and expr.value is None


def _rewrite(expr):
    if isinstance(expr, Binary):
        left = _rewrite(expr.left)
        right = _rewrite(expr.right)
        if expr.op in ("==", "!="):
            operand = None
            if _is_null_literal(right) and not _is_null_literal(left):
                operand = left
            elif _is_null_literal(left) and not _is_null_literal(right):
                operand = right
            if operand is not None:
                call = Call("is_null", (operand,))
                return call if expr.op == "==" else Unary("!", call)
        return Binary(expr.op, left, right)
    if isinstance(expr, Unary):
        return Unary(expr.op, _rewrite(expr.operand))
    if isinstance(expr, Old):
        return Old(_rewrite(expr.expr))
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_rewrite(a) for a in expr.args))
    if isinstance(expr, MethodCall):
        receiver = expr.receiver
        if isinstance(receiver, Ident) and receiver.name in _STATIC_RECEIVERS:
            builtin = _STATIC_METHODS.get(expr.method)
            if builtin is None or len(expr.args) != 1:
                raise NormalizationError(f"{receiver.name}.{expr.method}(...)")
            return Call(builtin, (_rewrite(expr.args[0]),))
        builtin = _INSTANCE_METHODS.get(expr.method)
        if builtin is None or expr.args:
            raise NormalizationError(f"x.{expr.method}(...)")
        return Call(builtin, (_rewrite(receiver),))
    return expr


def normalize(source, dialect="java_like"):
    """Rewrite `source` into canonical text; `dialect="canonical"` is the identity."""
    if dialect == "canonical":
        return source
    if dialect != "java_like":
        raise ValueError(f"unknown dialect: {dialect}")
    tree = parse(source, java_like=True)
    return pretty_print(_rewrite(tree))


def rewrite_constructor_precondition(expr):
    """Replace `this.X` with the like-named parameter `X` in a constructor
    precondition, where the object does not exist yet. Returns
    (rewritten_expr, changed)."""
    changed = False

    def walk(node):
        nonlocal changed
        if isinstance(node, ThisField):
            changed = True
            return Ident(node.name)
        if isinstance(node, Binary):
            return Binary(node.op, walk(node.left), walk(node.right))
        if isinstance(node, Unary):
            return Unary(node.op, walk(node.operand))
        if isinstance(node, Old):
            return Old(walk(node.expr))
        if isinstance(node, Call):
            return Call(node.name, tuple(walk(a) for a in node.args))
        return node

    return walk(expr), changed
