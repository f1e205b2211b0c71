"""Recursive-descent parser for the contract expression grammar.

Precedence (loosest first): ``||`` < ``&&`` < comparisons < additive <
multiplicative < unary < call/access. Comparisons are non-associative;
chains like ``a < b < c`` are rejected.

``java_like=True`` additionally accepts method calls (``x.isEmpty()``,
``Double.isNaN(x)``) so Table-style LLM output can be parsed before the
normalizer rewrites those nodes away.
"""

import json

from ..errors import ExprSyntaxError
from .ast import BUILTIN_ARITY, BUILTIN_NAMES, Binary, Call, Ident, Literal, MethodCall, Old, Result, ThisField, Unary

_KEYWORDS = {"true", "false", "null", "this", "old", "result"}

_PUNCT = ["&&", "||", "==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "!", "(", ")", ",", "."]


class _Token:
    __slots__ = ("kind", "text", "value", "offset")

    def __init__(self, kind, text, value, offset):
        self.kind = kind  # "ident" | "int" | "decimal" | "text" | punctuation literal | "eof"
        self.text = text
        self.value = value
        self.offset = offset


def _tokenize(source):
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], source[i:j], i))
            i = j
            continue
        if c.isdigit():
            j = i
            is_decimal = False
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_decimal = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_decimal = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            if is_decimal:
                tokens.append(_Token("decimal", text, float(text), i))
            else:
                tokens.append(_Token("int", text, int(text), i))
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == '"':
                    break
                j += 1
            if j >= n:
                raise ExprSyntaxError("unterminated text literal", i, {'"'})
            raw = source[i : j + 1]
            try:
                value = json.loads(raw)
            except ValueError:
                raise ExprSyntaxError("invalid escape in text literal", i, {'"'}) from None
            tokens.append(_Token("text", raw, value, i))
            i = j + 1
            continue
        for punct in _PUNCT:
            if source.startswith(punct, i):
                tokens.append(_Token(punct, punct, punct, i))
                i += len(punct)
                break
        else:
            raise ExprSyntaxError(f"unexpected character {c!r}", i, set())
    tokens.append(_Token("eof", "", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens, java_like):
        self.tokens = tokens
        self.pos = 0
        self.java_like = java_like

    @property
    def cur(self):
        return self.tokens[self.pos]

    def _fail(self, expected):
        tok = self.cur
        got = tok.text or "end of input"
        raise ExprSyntaxError(f"expected one of {sorted(expected)}, got {got!r}", tok.offset, expected)

    def expect(self, kind):
        if self.cur.kind != kind:
            self._fail({kind})
        tok = self.cur
        self.pos += 1
        return tok

    def accept(self, kind):
        if self.cur.kind == kind:
            self.pos += 1
            return True
        return False

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.cur.kind == "||":
            self.pos += 1
            left = Binary("||", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_cmp()
        while self.cur.kind == "&&":
            self.pos += 1
            left = Binary("&&", left, self.parse_cmp())
        return left

    def parse_cmp(self):
        left = self.parse_add()
        if self.cur.kind in ("==", "!=", "<", "<=", ">", ">="):
            op = self.cur.kind
            self.pos += 1
            right = self.parse_add()
            if self.cur.kind in ("==", "!=", "<", "<=", ">", ">="):
                raise ExprSyntaxError(
                    "comparisons are non-associative; use && to chain",
                    self.cur.offset,
                    {"&&", "||", ")", "eof"},
                )
            return Binary(op, left, right)
        return left

    def parse_add(self):
        left = self.parse_mul()
        while self.cur.kind in ("+", "-"):
            op = self.cur.kind
            self.pos += 1
            left = Binary(op, left, self.parse_mul())
        return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.cur.kind in ("*", "/"):
            op = self.cur.kind
            self.pos += 1
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.cur.kind == "!":
            self.pos += 1
            return Unary("!", self.parse_unary())
        if self.cur.kind == "-":
            self.pos += 1
            operand = self.parse_unary()
            # fold negation of a numeric literal so "-2" round-trips as one node
            if isinstance(operand, Literal) and type(operand.value) in (int, float):
                return Literal(-operand.value)
            return Unary("-", operand)
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while self.cur.kind == ".":
            dot_offset = self.cur.offset
            self.pos += 1
            name = self.expect("ident")
            if self.cur.kind == "(":
                if not self.java_like:
                    raise ExprSyntaxError(
                        "method calls are not part of the canonical grammar",
                        dot_offset,
                        {"&&", "||", "eof"},
                    )
                args = self.parse_args()
                expr = MethodCall(expr, name.text, tuple(args))
            else:
                raise ExprSyntaxError(
                    "field access is only allowed on `this`", dot_offset, {"("}
                )
        return expr

    def parse_args(self):
        self.expect("(")
        args = []
        if not self.accept(")"):
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
            self.expect(")")
        return args

    def parse_primary(self):
        tok = self.cur
        if tok.kind in ("int", "decimal", "text"):
            self.pos += 1
            return Literal(tok.value)
        if tok.kind == "(":
            self.pos += 1
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "ident":
            name = tok.text
            if name == "true":
                self.pos += 1
                return Literal(True)
            if name == "false":
                self.pos += 1
                return Literal(False)
            if name == "null":
                self.pos += 1
                return Literal(None)
            if name == "result":
                self.pos += 1
                return Result()
            if name == "this":
                self.pos += 1
                self.expect(".")
                field = self.expect("ident")
                return ThisField(field.text)
            if name == "old":
                self.pos += 1
                self.expect("(")
                inner = self.parse_expr()
                self.expect(")")
                return Old(inner)
            if name in BUILTIN_NAMES:
                self.pos += 1
                args = self.parse_args()
                arity = BUILTIN_ARITY[name]
                if isinstance(arity, int):
                    ok = len(args) == arity
                    want = str(arity)
                else:
                    ok = len(args) >= arity[0]
                    want = f">= {arity[0]}"
                if not ok:
                    raise ExprSyntaxError(
                        f"builtin {name} takes {want} argument(s), got {len(args)}",
                        tok.offset,
                        set(),
                    )
                return Call(name, tuple(args))
            self.pos += 1
            return Ident(name)
        self._fail({"literal", "identifier", "("})


def parse(source, java_like=False):
    """Parse a contract expression; raises ExprSyntaxError on malformed input."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, {"expression"})
    parser = _Parser(_tokenize(source), java_like)
    expr = parser.parse_expr()
    if parser.cur.kind != "eof":
        parser._fail({"eof"})
    return expr
