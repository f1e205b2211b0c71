"""Test-side helpers: an independent brute-force evaluator (written against
the language definition, not the production evaluator) and a random
expression generator used by the equivalence suites."""

import math
import random

from contractloop.lang import Binary, Call, Ident, Literal, Old, Result, ThisField, Unary

# The eight Account-constructor contracts as the model emitted them
# (Java dialect), used as the golden fixture corpus.
ACCOUNT_CLAUSES = [
    ("precondition", "accountNumber", "accountNumber != null && !accountNumber.isEmpty()"),
    ("precondition", "pin", "0 <= pin && pin <= 9999"),
    ("precondition", "balance", "this.balance >= 0"),
    ("precondition", "balance", "!Double.isNaN(balance) && !Double.isInfinite(balance)"),
    ("postcondition", "accountNumber", "this.accountNumber == accountNumber"),
    ("postcondition", "pin", "this.pin == pin"),
    ("postcondition", "balance", "this.balance == balance"),
    ("postcondition", "balance", "this.balance >= 0"),
]


class OracleError(Exception):
    pass


def _oracle_value(node, variables):
    """Plain recursive interpreter. Raises OracleError on any evaluation
    failure; truth-functional short-circuit for && and ||."""
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Ident):
        if node.name in variables:
            return variables[node.name]
        raise OracleError("unbound")
    if isinstance(node, (ThisField, Old, Result)):
        raise OracleError("unbound")  # generator never binds state
    if isinstance(node, Unary):
        v = _oracle_value(node.operand, variables)
        if node.op == "!":
            if type(v) is not bool:
                raise OracleError("type")
            return not v
        if type(v) is bool or not isinstance(v, (int, float)):
            raise OracleError("type")
        return -v
    if isinstance(node, Call):
        args = [_oracle_value(a, variables) for a in node.args]

        def num(x):
            if type(x) is bool or not isinstance(x, (int, float)):
                raise OracleError("type")
            return x

        if node.name == "abs":
            return abs(num(args[0]))
        if node.name == "min":
            return min(num(a) for a in args)
        if node.name == "max":
            return max(num(a) for a in args)
        if node.name == "is_null":
            return args[0] is None
        if node.name == "is_nan":
            return isinstance(num(args[0]), float) and math.isnan(args[0])
        if node.name == "is_infinite":
            return isinstance(num(args[0]), float) and math.isinf(args[0])
        if node.name == "is_finite":
            num(args[0])
            return not (isinstance(args[0], float) and not math.isfinite(args[0]))
        raise OracleError("type")
    if isinstance(node, Binary):
        op = node.op
        if op in ("&&", "||"):
            left = _oracle_value(node.left, variables)
            if type(left) is not bool:
                raise OracleError("type")
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            right = _oracle_value(node.right, variables)
            if type(right) is not bool:
                raise OracleError("type")
            return right
        left = _oracle_value(node.left, variables)
        right = _oracle_value(node.right, variables)

        def num(x):
            if type(x) is bool or not isinstance(x, (int, float)):
                raise OracleError("type")
            return x

        if op in ("==", "!="):
            if isinstance(left, (int, float)) and type(left) is not bool and isinstance(
                right, (int, float)
            ) and type(right) is not bool:
                eq = left == right
            elif type(left) is type(right):
                eq = left == right
            else:
                eq = False
            return eq if op == "==" else not eq
        if op in ("<", "<=", ">", ">="):
            if isinstance(left, str) and isinstance(right, str):
                pass
            else:
                num(left), num(right)
            import operator

            return {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}[
                op
            ](left, right)
        num(left), num(right)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            raise OracleError("division by zero")
        return left / right
    raise OracleError("type")


def oracle_outcome(expr, variables):
    """Final three-valued truth: 'holds' | 'violated' | 'indeterminate'."""
    try:
        value = _oracle_value(expr, variables)
    except OracleError:
        return "indeterminate"
    if type(value) is not bool:
        return "indeterminate"
    return "holds" if value else "violated"


def random_bool_expr(rng: random.Random, depth: int, names):
    """Boolean-typed expression of depth <= `depth` over integer variables
    `names` (one extra, never-bound name is mixed in to exercise
    unbound-identifier handling)."""
    if depth <= 0:
        return Literal(rng.random() < 0.5)
    pick = rng.randrange(8)
    if pick == 0:
        return Literal(rng.random() < 0.5)
    if pick in (1, 2):
        op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
        return Binary(op, random_int_expr(rng, depth - 1, names), random_int_expr(rng, depth - 1, names))
    if pick in (3, 4):
        op = rng.choice(["&&", "||"])
        return Binary(op, random_bool_expr(rng, depth - 1, names), random_bool_expr(rng, depth - 1, names))
    if pick == 5:
        return Unary("!", random_bool_expr(rng, depth - 1, names))
    if pick == 6:
        name = rng.choice(["is_nan", "is_infinite", "is_finite", "is_null"])
        return Call(name, (random_int_expr(rng, depth - 1, names),))
    # sometimes a deliberately ill-typed node: boolean where a number goes
    return Binary("<", random_bool_expr(rng, depth - 1, names), random_int_expr(rng, depth - 1, names))


def random_int_expr(rng: random.Random, depth: int, names):
    if depth <= 0 or rng.random() < 0.4:
        if rng.random() < 0.5:
            return Literal(rng.randrange(-5, 6))
        return Ident(rng.choice(list(names) + ["unbound_name"]))
    pick = rng.randrange(5)
    if pick == 0:
        inner = random_int_expr(rng, depth - 1, names)
        if isinstance(inner, Literal):
            return Literal(-inner.value)
        return Unary("-", inner)
    if pick == 1:
        return Call("abs", (random_int_expr(rng, depth - 1, names),))
    if pick == 2:
        fn = rng.choice(["min", "max"])
        return Call(
            fn,
            (random_int_expr(rng, depth - 1, names), random_int_expr(rng, depth - 1, names)),
        )
    op = rng.choice(["+", "-", "*", "/"])
    return Binary(op, random_int_expr(rng, depth - 1, names), random_int_expr(rng, depth - 1, names))


def random_env_bindings(rng: random.Random, names):
    return {name: rng.randrange(-10, 11) for name in names}
