"""Arithmetic expression language used for parameter constraints and sketch coordinates.

Grammar (standard precedence, left-associative):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | ident | '-' factor | func '(' expr (',' expr)* ')' | '(' expr ')'
    func   := 'min' | 'max' | 'abs'
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EvaluationError, ExpressionError

FUNCTIONS = ("min", "max", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Node", ...]


Node = Num | Ref | Neg | BinOp | Call


_TOKEN_CHARS = set("+-*/(),")


def _tokenize(text):
    """Yield (kind, value, position) triples; kind in {num, ident, op}."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_CHARS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or text[j] == "."):
                if text[j] == ".":
                    if seen_dot:
                        raise ExpressionError("malformed number", j)
                    seen_dot = True
                j += 1
            lexeme = text[i:j]
            if lexeme == ".":
                raise ExpressionError("malformed number", i)
            tokens.append(("num", lexeme, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExpressionError(f"unexpected character {c!r}", i)
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("end", "", -1)

    def advance(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, value):
        kind, lexeme, at = self.advance()
        if kind != "op" or lexeme != value:
            raise ExpressionError(f"expected {value!r}", at if at >= 0 else None)

    def expr(self):
        node = self.term()
        while True:
            kind, lexeme, _ = self.peek()
            if kind == "op" and lexeme in "+-":
                self.advance()
                node = BinOp(lexeme, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, lexeme, _ = self.peek()
            if kind == "op" and lexeme in "*/":
                self.advance()
                node = BinOp(lexeme, node, self.factor())
            else:
                return node

    def factor(self):
        kind, lexeme, at = self.advance()
        if kind == "num":
            return Num(float(lexeme))
        if kind == "op" and lexeme == "-":
            return Neg(self.factor())
        if kind == "op" and lexeme == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            nk, nl, _ = self.peek()
            if nk == "op" and nl == "(":
                return self.call(lexeme, at)
            return Ref(lexeme)
        if kind == "end":
            raise ExpressionError("unexpected end of expression")
        raise ExpressionError(f"unexpected token {lexeme!r}", at)

    def call(self, name, at):
        if name not in FUNCTIONS:
            raise ExpressionError(f"unknown function {name!r}", at)
        self.expect_op("(")
        args = [self.expr()]
        while True:
            kind, lexeme, _ = self.peek()
            if kind == "op" and lexeme == ",":
                self.advance()
                args.append(self.expr())
            else:
                break
        self.expect_op(")")
        if name == "abs" and len(args) != 1:
            raise ExpressionError("abs takes exactly one argument", at)
        if name in ("min", "max") and len(args) < 2:
            raise ExpressionError(f"{name} takes at least two arguments", at)
        return Call(name, tuple(args))


def parse_expression(text):
    """Parse an expression string into an AST node."""
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    parser = _Parser(tokens)
    node = parser.expr()
    kind, lexeme, at = parser.peek()
    if kind != "end":
        raise ExpressionError(f"trailing input starting at {lexeme!r}", at)
    return node


def references(node):
    """Set of parameter names the expression reads."""
    out = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Ref):
            out.add(cur.name)
        elif isinstance(cur, Neg):
            stack.append(cur.operand)
        elif isinstance(cur, BinOp):
            stack.append(cur.left)
            stack.append(cur.right)
        elif isinstance(cur, Call):
            stack.extend(cur.args)
    return out


def evaluate(node, env):
    """Evaluate the AST against a name -> value mapping."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Ref):
        try:
            return env[node.name]
        except KeyError:
            raise EvaluationError(f"unknown parameter {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, BinOp):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        try:
            return left / right
        except ZeroDivisionError:
            raise EvaluationError("division by zero") from None
    if isinstance(node, Call):
        values = [evaluate(arg, env) for arg in node.args]
        if node.func == "min":
            return min(values)
        if node.func == "max":
            return max(values)
        return abs(values[0])
    raise TypeError(f"not an expression node: {node!r}")


def _precedence(node):
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    return 4


def pretty(node):
    """Render the AST back to source; pretty(parse(e)) reparses to the same AST."""
    if isinstance(node, Num):
        value = node.value
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        text = repr(value)
        if "e" in text or "E" in text:
            # the lexer has no exponent form
            text = f"{value:.17f}"
        return text
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        if _precedence(node.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        mine = _precedence(node)
        left = pretty(node.left)
        if _precedence(node.left) < mine:
            left = f"({left})"
        right = pretty(node.right)
        # left-associative: the right child needs parens on equal precedence
        if _precedence(node.right) <= mine:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Call):
        return f"{node.func}(" + ", ".join(pretty(a) for a in node.args) + ")"
    raise TypeError(f"not an expression node: {node!r}")
