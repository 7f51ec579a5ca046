"""Forward-mode differentiation of expression trees, exact to third order.

A `Jet` carries the value and all partial derivatives of a scalar quantity up
to a requested order at a batch of points: value (B,), grad (B,n),
hess (B,n,n), third (B,n,n,n).  Arithmetic propagates derivatives by the
Leibniz and chain rules, so results are exact up to roundoff; finite
differences appear in this package only as independent test oracles.

Evaluation is pure and allocates per call, so expressions may be evaluated
concurrently without locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EvalDomainError
from .nodes import BinOp, Call, Expression, Neg, Node, Num, Var, to_source

_ABS_GUARD = 1e-12
_MAX_INT_EXPONENT = 64


@dataclass(frozen=True)
class Jet3:
    """Value and exact partial derivatives (orders 1..3) at a single point."""

    value: float
    grad: np.ndarray  # (n,)
    hess: np.ndarray  # (n, n), symmetric
    third: np.ndarray  # (n, n, n), symmetric under all permutations


class Jet:
    """Batched truncated derivative tower of a scalar over n variables."""

    __slots__ = ("order", "n", "value", "grad", "hess", "third")

    def __init__(self, order, n, value, grad=None, hess=None, third=None):
        self.order = order
        self.n = n
        self.value = value
        self.grad = grad
        self.hess = hess
        self.third = third

    @classmethod
    def constant(cls, c: float, batch: int, n: int, order: int) -> "Jet":
        value = np.full(batch, float(c))
        return cls(order, n,
                   value,
                   np.zeros((batch, n)) if order >= 1 else None,
                   np.zeros((batch, n, n)) if order >= 2 else None,
                   np.zeros((batch, n, n, n)) if order >= 3 else None)

    @classmethod
    def variable(cls, x: np.ndarray, index: int, order: int) -> "Jet":
        batch, n = x.shape
        grad = hess = third = None
        if order >= 1:
            grad = np.zeros((batch, n))
            grad[:, index] = 1.0
        if order >= 2:
            hess = np.zeros((batch, n, n))
        if order >= 3:
            third = np.zeros((batch, n, n, n))
        return cls(order, n, x[:, index].copy(), grad, hess, third)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "Jet") -> "Jet":
        k = self.order
        return Jet(k, self.n,
                   self.value + other.value,
                   self.grad + other.grad if k >= 1 else None,
                   self.hess + other.hess if k >= 2 else None,
                   self.third + other.third if k >= 3 else None)

    def __sub__(self, other: "Jet") -> "Jet":
        k = self.order
        return Jet(k, self.n,
                   self.value - other.value,
                   self.grad - other.grad if k >= 1 else None,
                   self.hess - other.hess if k >= 2 else None,
                   self.third - other.third if k >= 3 else None)

    def __neg__(self) -> "Jet":
        k = self.order
        return Jet(k, self.n,
                   -self.value,
                   -self.grad if k >= 1 else None,
                   -self.hess if k >= 2 else None,
                   -self.third if k >= 3 else None)

    def __mul__(self, other: "Jet") -> "Jet":
        k = self.order
        u, v = self, other
        value = u.value * v.value
        grad = hess = third = None
        if k >= 1:
            grad = u.grad * v.value[:, None] + v.grad * u.value[:, None]
        if k >= 2:
            cross = u.grad[:, :, None] * v.grad[:, None, :]
            hess = (u.hess * v.value[:, None, None]
                    + v.hess * u.value[:, None, None]
                    + cross + np.swapaxes(cross, 1, 2))
        if k >= 3:
            third = (u.third * v.value[:, None, None, None]
                     + v.third * u.value[:, None, None, None]
                     + _sym_hg(u.hess, v.grad) + _sym_hg(v.hess, u.grad))
        return Jet(k, self.n, value, grad, hess, third)

    def __truediv__(self, other: "Jet") -> "Jet":
        return self * other._reciprocal()

    def _reciprocal(self) -> "Jet":
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4)

    def compose(self, f0, f1, f2=None, f3=None) -> "Jet":
        """Chain rule for an outer scalar function with derivatives f0..f3 at value."""
        k = self.order
        grad = hess = third = None
        if k >= 1:
            grad = f1[:, None] * self.grad
        if k >= 2:
            outer = self.grad[:, :, None] * self.grad[:, None, :]
            hess = f2[:, None, None] * outer + f1[:, None, None] * self.hess
        if k >= 3:
            cube = (self.grad[:, :, None, None] * self.grad[:, None, :, None]
                    * self.grad[:, None, None, :])
            third = (f3[:, None, None, None] * cube
                     + f2[:, None, None, None] * _sym_hg(self.hess, self.grad)
                     + f1[:, None, None, None] * self.third)
        return Jet(k, self.n, np.asarray(f0, dtype=float), grad, hess, third)

    def ipow(self, exponent: int) -> "Jet":
        """Integer power by repeated multiplication (valid for any base sign)."""
        if exponent == 0:
            return Jet.constant(1.0, self.value.shape[0], self.n, self.order)
        result = None
        base = self
        e = abs(exponent)
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return result._reciprocal() if exponent < 0 else result


def _sym_hg(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Symmetrized hess-grad product: h_ij g_k + h_ik g_j + h_jk g_i."""
    t = h[:, :, :, None] * g[:, None, None, :]
    return t + np.transpose(t, (0, 1, 3, 2)) + np.transpose(t, (0, 3, 1, 2))


def _domain_check(ok: np.ndarray, message: str, node: Node) -> None:
    if not np.all(ok):
        raise EvalDomainError(message, to_source(node))


def _eval_call(node: Call, u: Jet) -> Jet:
    v = u.value
    name = node.func
    if name == "sin":
        s, c = np.sin(v), np.cos(v)
        return u.compose(s, c, -s, -c)
    if name == "cos":
        s, c = np.sin(v), np.cos(v)
        return u.compose(c, -s, -c, s)
    if name == "tan":
        _domain_check(np.abs(np.cos(v)) > 1e-12, "tan at a pole", node)
        t = np.tan(v)
        sec2 = 1.0 + t * t
        return u.compose(t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t))
    if name == "exp":
        e = np.exp(v)
        return u.compose(e, e, e, e)
    if name == "log":
        _domain_check(v > 0.0, "log of non-positive argument", node)
        return u.compose(np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)
    if name == "sqrt":
        _domain_check(v > 0.0, "sqrt of non-positive argument", node)
        r = np.sqrt(v)
        return u.compose(r, 0.5 / r, -0.25 / (v * r), 0.375 / (v * v * r))
    if name == "abs":
        _domain_check(np.abs(v) > _ABS_GUARD, "abs at a non-differentiable point", node)
        s = np.sign(v)
        z = np.zeros_like(v)
        return u.compose(np.abs(v), s, z, z)
    raise EvalDomainError(f"unknown function '{name}'", to_source(node))


def _constant_exponent(node: Node) -> float | None:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg) and isinstance(node.operand, Num):
        return -node.operand.value
    return None


def _eval_pow(node: BinOp, base: Jet, x: np.ndarray, order: int, idx) -> Jet:
    p = _constant_exponent(node.right)
    if p is not None:
        if p == round(p) and abs(p) <= _MAX_INT_EXPONENT:
            return base.ipow(int(round(p)))
        _domain_check(base.value > 0.0, "non-integer power of non-positive base", node)
        v = base.value
        return base.compose(v**p, p * v**(p - 1), p * (p - 1) * v**(p - 2),
                            p * (p - 1) * (p - 2) * v**(p - 3))
    # Exponent is itself an expression: u^w = exp(w log u), u > 0 required.
    _domain_check(base.value > 0.0, "power with non-constant exponent needs positive base", node)
    w = _eval_node(node.right, x, order, idx)
    v = base.value
    inner = w * base.compose(np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)
    e = np.exp(inner.value)
    return inner.compose(e, e, e, e)


def _eval_node(node: Node, x: np.ndarray, order: int, idx: dict) -> Jet:
    if isinstance(node, Num):
        return Jet.constant(node.value, x.shape[0], x.shape[1], order)
    if isinstance(node, Var):
        return Jet.variable(x, idx[node.name], order)
    if isinstance(node, Neg):
        return -_eval_node(node.operand, x, order, idx)
    if isinstance(node, Call):
        return _eval_call(node, _eval_node(node.arg, x, order, idx))
    if isinstance(node, BinOp):
        if node.op == "^":
            return _eval_pow(node, _eval_node(node.left, x, order, idx), x, order, idx)
        left = _eval_node(node.left, x, order, idx)
        right = _eval_node(node.right, x, order, idx)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            _domain_check(right.value != 0.0, "division by zero", node)
            return left / right
    raise TypeError(f"unknown node {node!r}")


def eval_jet(expr: Expression, x: np.ndarray, order: int = 3) -> Jet:
    """Evaluate an expression and its derivatives up to `order` at points x (B, n)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != len(expr.variables):
        raise ValueError(f"expected {len(expr.variables)} coordinates, got {x.shape[1]}")
    if not 0 <= order <= 3:
        raise ValueError("order must be 0..3")
    idx = {name: i for i, name in enumerate(expr.variables)}
    return _eval_node(expr.root, x, order, idx)


def eval_value(expr: Expression, x: np.ndarray) -> np.ndarray:
    """Fast value-only evaluation at points x (B, n)."""
    return eval_jet(expr, x, order=0).value


def eval_jet3(expr: Expression, x) -> Jet3:
    """Evaluate value, gradient, Hessian, and third derivatives at one point."""
    jet = eval_jet(expr, np.asarray(x, dtype=float)[None, :], order=3)
    return Jet3(float(jet.value[0]), jet.grad[0], jet.hess[0], jet.third[0])
