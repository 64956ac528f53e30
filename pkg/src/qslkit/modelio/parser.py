"""Operator-expression language for model files.

Grammar, lowest precedence first::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | primary
    primary:= number | atom | '(' expr ')' | 'dag(' expr ')'
            | 'kron(' expr ',' expr ')' | 'sqrt(' expr ')'

Numbers are decimals with an optional trailing ``i`` (``2.5i``); a bare ``i``
is the imaginary unit. Atoms: ``sx sy sz sp sm``, ``id(d)``, ``gm(k)``,
``proj(i,j,d)``, ``coll_sm(N)``, ``coll_sz(N)``. Scalars multiply matrices
from either side; division is by scalars only. There is no implicit
multiplication.
"""

import cmath
import re
from dataclasses import dataclass, replace

import numpy as np

from .. import operators as ops
from ..errors import DomainError, ParseError

#: Largest matrix dimension an expression may build.
MAX_DIM = 2**ops.MAX_QUBITS

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    start: int
    end: int


def tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", source, pos)
        kind = m.lastgroup
        if kind == "num":
            end = m.end()
            # trailing 'i' makes an imaginary literal unless it starts a name
            if end < len(source) and source[end] == "i" and not (
                end + 1 < len(source) and (source[end + 1].isalnum() or source[end + 1] == "_")
            ):
                end += 1
            tokens.append(Token("num", source[pos:end], pos, end))
            pos = end
            continue
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos, m.end()))
        pos = m.end()
    tokens.append(Token("end", "", len(source), len(source)))
    return tokens


# --- syntax tree -----------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex
    span: tuple


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple
    span: tuple


@dataclass(frozen=True)
class Neg:
    operand: object
    span: tuple


@dataclass(frozen=True)
class Call:
    """``dag``, ``sqrt`` or ``kron`` applied to sub-expressions."""

    func: str
    args: tuple
    span: tuple


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: tuple


ATOM_ARITY = {
    "sx": 0, "sy": 0, "sz": 0, "sp": 0, "sm": 0,
    "id": 1, "gm": 1, "proj": 3, "coll_sm": 1, "coll_sz": 1,
}
FUNC_ARITY = {"dag": 1, "sqrt": 1, "kron": 2}


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"{msg}, found {what}", self.source, tok.start, max(tok.end, tok.start + 1))

    def take(self):
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            raise self.error(f"expected {text!r}")
        return self.take()

    def parse(self):
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error("unexpected trailing input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.take().text
            right = self.term()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.factor()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.take().text
            right = self.factor()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            start = self.take().start
            operand = self.factor()
            return Neg(operand, (start, operand.span[1]))
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.take()
            text = tok.text
            value = complex(0, float(text[:-1])) if text.endswith("i") else complex(float(text))
            if not cmath.isfinite(value):
                raise ParseError("number overflows", self.source, tok.start, tok.end)
            return Num(value, (tok.start, tok.end))
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            close = self.expect(")")
            return _respan(node, (tok.start, close.end))
        if tok.kind == "ident":
            self.take()
            name = tok.text
            if name == "i":
                return Num(1j, (tok.start, tok.end))
            if name in FUNC_ARITY:
                self.expect("(")
                args = [self.expr()]
                for _ in range(FUNC_ARITY[name] - 1):
                    self.expect(",")
                    args.append(self.expr())
                close = self.expect(")")
                return Call(name, tuple(args), (tok.start, close.end))
            if name in ATOM_ARITY:
                args = []
                end = tok.end
                if ATOM_ARITY[name]:
                    self.expect("(")
                    for k in range(ATOM_ARITY[name]):
                        if k:
                            self.expect(",")
                        arg = self.tok
                        if arg.kind != "num" or not arg.text.isdigit():
                            raise self.error(f"{name} expects a nonnegative integer argument")
                        args.append(int(self.take().text))
                    end = self.expect(")").end
                return Atom(name, tuple(args), (tok.start, end))
            raise ParseError(f"unknown atom {name!r}", self.source, tok.start, tok.end)
        raise self.error("expected a number, atom or '('")


def _respan(node, span):
    return replace(node, span=span)


def parse(source):
    """Parse ``source`` into a syntax tree; raises :class:`ParseError`."""
    if not isinstance(source, str):
        raise ParseError("expression must be a string", "", 0)
    try:
        return _Parser(source).parse()
    except RecursionError:
        raise ParseError("expression nested too deeply", source, 0, len(source)) from None


# --- evaluation ------------------------------------------------------------


def _atom_value(node, source):
    name, args = node.name, node.args

    def fail(msg):
        return ParseError(msg, source, *node.span)

    for a in args:
        if a > MAX_DIM:
            raise fail(f"argument {a} of {name} exceeds the size cap {MAX_DIM}")
    try:
        if name in ("sx", "sy", "sz"):
            return ops.pauli(name[1])
        if name == "sp":
            return ops.ladder("plus")
        if name == "sm":
            return ops.ladder("minus")
        if name == "id":
            return ops.identity(args[0])
        if name == "gm":
            return ops.gell_mann(args[0])
        if name == "proj":
            return ops.projector(*args)
        if name == "coll_sm":
            return ops.collective_lowering(args[0])
        if name == "coll_sz":
            return ops.collective_dephasing(args[0])
    except DomainError as exc:
        raise fail(str(exc)) from None
    raise fail(f"unknown atom {name!r}")


def _is_scalar(x):
    return not isinstance(x, np.ndarray)


def evaluate(node, source=""):
    """Evaluate a tree to a complex scalar or a square complex matrix."""

    def fail(msg, n):
        return ParseError(msg, source, *n.span)

    def ev(n):
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Atom):
            return _atom_value(n, source)
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, Call):
            vals = [ev(a) for a in n.args]
            if n.func == "dag":
                v = vals[0]
                return v.conjugate() if _is_scalar(v) else np.conj(v).T
            if n.func == "sqrt":
                if not _is_scalar(vals[0]):
                    raise fail("sqrt takes a scalar argument", n)
                v = complex(vals[0])
                # drop a signed zero so sqrt(-4) is 2i, not -2i
                return cmath.sqrt(complex(v.real, v.imag + 0.0))
            a, b = (np.atleast_2d(np.asarray(v, dtype=np.complex128)) for v in vals)
            if a.shape[0] * b.shape[0] > MAX_DIM:
                raise fail(f"kron result exceeds the size cap {MAX_DIM}", n)
            return np.kron(a, b)
        if isinstance(n, BinOp):
            left, right = ev(n.left), ev(n.right)
            sl, sr = _is_scalar(left), _is_scalar(right)
            if n.op == "/":
                if not sr:
                    raise fail("division is only defined by a scalar", n)
                if right == 0:
                    raise fail("division by zero", n)
                return left / right
            if n.op == "*":
                if sl or sr:
                    return left * right
                if left.shape != right.shape:
                    raise fail(f"dimension mismatch in product: {left.shape} vs {right.shape}", n)
                return left @ right
            if sl != sr:
                raise fail("cannot add a scalar and a matrix", n)
            if not sl and left.shape != right.shape:
                raise fail(f"dimension mismatch in sum: {left.shape} vs {right.shape}", n)
            return left + right if n.op == "+" else left - right
        raise TypeError(f"not an expression node: {n!r}")

    try:
        with np.errstate(all="ignore"):
            value = ev(node)
    except (OverflowError, ZeroDivisionError, FloatingPointError) as exc:
        raise fail(f"arithmetic error: {exc}", node) from None
    if _is_scalar(value):
        if not cmath.isfinite(value):
            raise fail("expression is not finite", node)
        return complex(value)
    if not np.all(np.isfinite(value)):
        raise fail("expression is not finite", node)
    return value


def parse_operator(text, dim):
    """Evaluate ``text`` to a ``dim`` x ``dim`` matrix.

    A scalar result ``s`` is read as ``s * id(dim)``.
    """
    node = parse(text)
    value = evaluate(node, text)
    if _is_scalar(value):
        return value * np.eye(dim, dtype=np.complex128)
    if value.shape != (dim, dim):
        raise ParseError(
            f"expression has shape {value.shape}, expected ({dim}, {dim})", text, 0, len(text)
        )
    return value


def parse_scalar(text):
    value = evaluate(parse(text), text)
    if not _is_scalar(value):
        raise ParseError("expected a scalar expression", text, 0, len(text))
    return value


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_text(z):
    if z.imag == 0:
        return repr(z.real)
    if z.real == 0:
        return f"{z.imag!r}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"({z.real!r}{sign}{abs(z.imag)!r}i)"


def to_text(node):
    """Render a tree as source that reparses to the same value."""

    def wrap(n, prec):
        text = to_text(n)
        return f"({text})" if isinstance(n, BinOp) and _PREC[n.op] < prec else text

    if isinstance(node, Num):
        text = _num_text(node.value)
        # a negative literal would bind as unary minus on reparse
        return f"({text})" if text.startswith("-") else text
    if isinstance(node, Atom):
        return node.name + (f"({','.join(map(str, node.args))})" if node.args else "")
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if isinstance(node.operand, (BinOp, Neg)) else f"-{inner}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        # left-associative: the right operand needs brackets at equal precedence
        return f"{wrap(node.left, prec)} {node.op} {wrap(node.right, prec + 1)}"
    raise TypeError(f"not an expression node: {node!r}")
