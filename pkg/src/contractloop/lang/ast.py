"""Expression tree node types.

Values inside Literal are plain Python: None, bool, int, float, str.
Trees are frozen dataclasses, freely shareable and hashable by structure
(floats compare by bit-pattern via the dataclass eq, so NaN literals are
structurally equal to themselves, which is what tree equality wants).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

BUILTIN_NAMES = frozenset(
    {"is_null", "is_empty", "is_nan", "is_infinite", "is_finite", "len", "abs", "min", "max"}
)

# arity: exact int, or (min, None) for variadic
BUILTIN_ARITY = {
    "is_null": 1,
    "is_empty": 1,
    "is_nan": 1,
    "is_infinite": 1,
    "is_finite": 1,
    "len": 1,
    "abs": 1,
    "min": (2, None),
    "max": (2, None),
}

COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Literal:
    value: Union[None, bool, int, float, str]

    def __eq__(self, other):
        if not isinstance(other, Literal):
            return NotImplemented
        # distinguish 1 from 1.0 from True; treat NaN literal as equal to itself
        if type(self.value) is not type(other.value):
            return False
        if isinstance(self.value, float):
            import struct

            return struct.pack("<d", self.value) == struct.pack("<d", other.value)
        return self.value == other.value

    def __hash__(self):
        return hash((type(self.value).__name__, repr(self.value)))


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class ThisField:
    name: str


@dataclass(frozen=True)
class Old:
    expr: "Expr"


@dataclass(frozen=True)
class Result:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # "&&" "||" "==" "!=" "<" "<=" ">" ">=" "+" "-" "*" "/"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str  # one of BUILTIN_NAMES
    args: tuple


@dataclass(frozen=True)
class MethodCall:
    """Java-dialect method call; only ever exists between java_like parsing
    and normalization, never in a canonical tree."""

    receiver: "Expr"
    method: str
    args: tuple


Expr = Union[Literal, Ident, ThisField, Old, Result, Unary, Binary, Call, MethodCall]
