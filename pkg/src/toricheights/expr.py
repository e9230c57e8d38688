"""Arithmetic expressions for analytic roof functions.

Grammar (whitespace insensitive):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := NUMBER | VAR | '(' expr ')' | 'min(' expr ',' expr ')'
            | 'max(' expr ',' expr ')' | 'pow(' expr ',' RATIONAL ')'
            | 'sqrt(' expr ')' | '-' factor
    VAR    := 'y' DIGIT+          NUMBER := decimal or 'p/q'

Expressions are parsed to a small AST and compiled to a stack program that
the evaluation kernels (compiled or numpy) run over batches of points.
Non-integer powers of negative numbers are out of domain and evaluate to
-inf, matching the boundary-singularity conventions of the roof calculus.
"""

from dataclasses import dataclass
from fractions import Fraction


class ExprSyntaxError(ValueError):
    """Parse failure; position is the 1-based offset of the failing character."""

    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class ArityError(ValueError):
    pass


class UnknownVariable(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int  # zero-based


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' | 'sqrt'
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str  # '+' | '-' | '*' | '/' | 'min' | 'max'
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: Fraction


class _Parser:
    def __init__(self, src, d):
        self.src = src
        self.d = d
        self.pos = 0

    def error(self, msg):
        raise ExprSyntaxError(msg, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def eat(self, ch):
        self.skip_ws()
        if not self.src.startswith(ch, self.pos):
            self.error(f"expected {ch!r}")
        self.pos += len(ch)

    def try_eat(self, ch):
        self.skip_ws()
        if self.src.startswith(ch, self.pos):
            self.pos += len(ch)
            return True
        return False

    def parse(self):
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.src):
            self.error("trailing input")
        return node

    def expr(self):
        node = self.term()
        while True:
            if self.try_eat("+"):
                node = Binary("+", node, self.term())
            elif self.try_eat("-"):
                node = Binary("-", node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            if self.try_eat("*"):
                node = Binary("*", node, self.factor())
            elif self.try_eat("/"):
                node = Binary("/", node, self.factor())
            else:
                return node

    def factor(self):
        c = self.peek()
        if c == "-":
            self.eat("-")
            return Unary("neg", self.factor())
        if c == "(":
            self.eat("(")
            node = self.expr()
            self.eat(")")
            return node
        if c.isalpha():
            ident = self.ident()
            if ident == "y":
                return self.var_index()
            if ident in ("min", "max"):
                self.eat("(")
                a = self.expr()
                self.eat(",")
                b = self.expr()
                self.eat(")")
                return Binary(ident, a, b)
            if ident == "pow":
                self.eat("(")
                base = self.expr()
                self.eat(",")
                exponent = self.rational()
                self.eat(")")
                return Pow(base, exponent)
            if ident == "sqrt":
                self.eat("(")
                node = self.expr()
                self.eat(")")
                return Unary("sqrt", node)
            self.error(f"unknown function {ident!r}")
        if c.isdigit() or c == ".":
            return Const(self.number())
        self.error("expected a factor")

    def ident(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isalpha():
            self.pos += 1
        return self.src[start : self.pos]

    def var_index(self):
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected variable index after 'y'")
        idx = int(self.src[start : self.pos])
        if not 1 <= idx <= self.d:
            raise UnknownVariable(f"y{idx} out of range for dimension {self.d}")
        return Var(idx - 1)

    def number(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.src) and (self.src[self.pos].isdigit() or self.src[self.pos] == "."):
            self.pos += 1
        if start == self.pos:
            self.error("expected a number")
        text = self.src[start : self.pos]
        try:
            val = Fraction(text)
        except ValueError:
            raise ExprSyntaxError(f"bad number {text!r}", start)
        self.skip_ws()
        if self.try_eat("/"):
            den_start = self.pos
            while self.pos < len(self.src) and self.src[self.pos].isdigit():
                self.pos += 1
            if den_start == self.pos:
                self.error("expected denominator")
            val = val / int(self.src[den_start : self.pos])
        return val

    def rational(self):
        self.skip_ws()
        neg = self.try_eat("-")
        val = self.number()
        return -val if neg else val


def parse_expression(src, d):
    """Parse a roof expression in variables y1..yd."""
    if d < 1:
        raise ArityError("dimension must be >= 1")
    return _Parser(src, d).parse()


parse_roof_expression = parse_expression


def format_expression(node):
    if isinstance(node, Const):
        v = node.value
        return str(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(node, Var):
        return f"y{node.index + 1}"
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"-({format_expression(node.arg)})"
        return f"sqrt({format_expression(node.arg)})"
    if isinstance(node, Pow):
        e = node.exponent
        es = str(e) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"
        return f"pow({format_expression(node.base)}, {es})"
    if node.op in ("min", "max"):
        return f"{node.op}({format_expression(node.left)}, {format_expression(node.right)})"
    return f"({format_expression(node.left)} {node.op} {format_expression(node.right)})"


# Stack-program opcodes shared by the compiled and numpy kernels.
OP_CONST = 0
OP_VAR = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_SQRT = 7
OP_POW = 8
OP_MIN = 9
OP_MAX = 10


def compile_expression(node):
    """Flatten an AST to (ops, args) arrays for the batch evaluators."""
    ops = []
    args = []

    def emit(n):
        if isinstance(n, Const):
            ops.append(OP_CONST)
            args.append(float(n.value))
        elif isinstance(n, Var):
            ops.append(OP_VAR)
            args.append(float(n.index))
        elif isinstance(n, Unary):
            emit(n.arg)
            ops.append(OP_NEG if n.op == "neg" else OP_SQRT)
            args.append(0.0)
        elif isinstance(n, Pow):
            emit(n.base)
            ops.append(OP_POW)
            args.append(float(n.exponent))
        elif isinstance(n, Binary):
            emit(n.left)
            emit(n.right)
            ops.append({"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "min": OP_MIN, "max": OP_MAX}[n.op])
            args.append(0.0)
        else:
            raise TypeError(f"unknown AST node {n!r}")

    emit(node)
    import numpy as np

    return np.asarray(ops, dtype=np.int32), np.asarray(args, dtype=np.float64)


def max_stack_depth(ops):
    depth = 0
    peak = 0
    for op in ops:
        if op in (OP_CONST, OP_VAR):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_MIN, OP_MAX):
            depth -= 1
        peak = max(peak, depth)
    return peak
