"""Expression trees: nodes, round-trippable printing, symbolic derivatives.

The grammar is small and fixed: +, -, *, /, ^ (real exponent), unary minus,
and the functions sin, cos, tan, exp, log, sqrt, abs over declared variables
and float literals.  Trees are immutable; printing emits source that reparses
to an identical tree.
"""

from __future__ import annotations

from dataclasses import dataclass

FUNCTION_NAMES = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")

# Precedence levels used by both the parser and the printer.
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


class Node:
    """Base class for AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


@dataclass(frozen=True)
class Expression:
    """A parsed expression over an ordered tuple of variable names."""

    root: Node
    variables: tuple[str, ...]

    def source(self) -> str:
        return to_source(self.root)

    def __str__(self) -> str:
        return self.source()


def _precedence(node: Node) -> int:
    if isinstance(node, (Num, Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, BinOp):
        return _PREC_POW if node.op == "^" else (_PREC_MUL if node.op in "*/" else _PREC_ADD)
    raise TypeError(f"unknown node {node!r}")


def _wrap(source: str, need: bool) -> str:
    return f"({source})" if need else source


def to_source(node: Node) -> str:
    """Print a node; parse(to_source(n)) reproduces n exactly."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = _wrap(to_source(node.operand), _precedence(node.operand) < _PREC_NEG)
        return f"-{inner}"
    if isinstance(node, BinOp):
        prec = _precedence(node)
        if node.op == "^":
            # Right-associative; the base must be an atom, the exponent a unary.
            left = _wrap(to_source(node.left), _precedence(node.left) < _PREC_ATOM)
            right = _wrap(to_source(node.right), _precedence(node.right) < _PREC_NEG)
        else:
            left = _wrap(to_source(node.left), _precedence(node.left) < prec)
            right = _wrap(to_source(node.right), _precedence(node.right) <= prec)
        return f"{left}{node.op}{right}"
    raise TypeError(f"unknown node {node!r}")


def _num(value: float) -> Num:
    return Num(float(value))


def _is_num(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return Neg(b) if not isinstance(b, Num) else _num(-b.value)
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return _num(0.0)
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def _derivative_node(node: Node, var: str) -> Node:
    if isinstance(node, Num):
        return _num(0.0)
    if isinstance(node, Var):
        return _num(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        d = _derivative_node(node.operand, var)
        return _num(0.0) if _is_num(d, 0.0) else _sub(_num(0.0), d)
    if isinstance(node, BinOp):
        da = _derivative_node(node.left, var)
        db = _derivative_node(node.right, var)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, node.right), _mul(node.left, db))
        if node.op == "/":
            num = _sub(_mul(da, node.right), _mul(node.left, db))
            return _div(num, BinOp("^", node.right, _num(2.0)))
        if node.op == "^":
            if isinstance(node.right, Num):
                c = node.right.value
                power = BinOp("^", node.left, _num(c - 1.0))
                return _mul(_mul(_num(c), power), da)
            # u^v = exp(v log u): derivative u^v (v' log u + v u'/u)
            bracket = _add(_mul(db, Call("log", node.left)),
                           _mul(node.right, _div(da, node.left)))
            return _mul(node, bracket)
    if isinstance(node, Call):
        da = _derivative_node(node.arg, var)
        if _is_num(da, 0.0):
            return _num(0.0)
        u = node.arg
        outer = {
            "sin": lambda: Call("cos", u),
            "cos": lambda: _sub(_num(0.0), Call("sin", u)),
            "tan": lambda: _div(_num(1.0), BinOp("^", Call("cos", u), _num(2.0))),
            "exp": lambda: node,
            "log": lambda: _div(_num(1.0), u),
            "sqrt": lambda: _div(_num(1.0), _mul(_num(2.0), node)),
            "abs": lambda: _div(u, node),
        }[node.func]()
        return _mul(outer, da)
    raise TypeError(f"unknown node {node!r}")


def differentiate(expr: Expression, var: str) -> Expression:
    """Exact symbolic partial derivative with respect to a declared variable."""
    if var not in expr.variables:
        raise ValueError(f"'{var}' is not a variable of this expression")
    return Expression(_derivative_node(expr.root, var), expr.variables)
