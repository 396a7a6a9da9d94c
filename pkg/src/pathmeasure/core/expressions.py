"""A tiny arithmetic language for cylinder-function bodies.

    cos(2*pi*x1) * exp(i*2*pi*x2)
    abs(x1 - x2)^2 / 4

Variables x1..xn, numbers, the constants pi, e and i, + - * / ^ (or **),
unary minus and the functions sin, cos, exp, abs, sqrt. Anything else is
rejected at parse time. Expressions compile into closures over numpy
ufuncs, never into `eval`.
"""
from __future__ import annotations

import ast
import math
import operator
import re
from typing import Any, Callable, Dict, Sequence

import numpy as np

from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import BodyExpression, CylinderFunction

Node = Callable[[Sequence[Any]], Any]

CONSTANTS: Dict[str, complex] = {"pi": math.pi, "e": math.e, "i": 1j}
FUNCTIONS: Dict[str, Callable[[Any], Any]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
}
BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
VARIABLE = re.compile(r"^x([1-9][0-9]*)$")


class _Compiler:
    def __init__(self, text: str, arity: int) -> None:
        self.text = text
        self.arity = arity

    def fail(self, what: str) -> DomainError:
        return DomainError(f"bad body expression {self.text!r}: {what}")

    def compile(self, node: ast.AST) -> Node:
        if isinstance(node, ast.Expression):
            return self.compile(node.body)

        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise self.fail(f"unsupported literal {node.value!r}")
            value = float(node.value)
            return lambda xs: value

        if isinstance(node, ast.Name):
            return self._name(node.id)

        if isinstance(node, ast.UnaryOp):
            inner = self.compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda xs: -inner(xs)
            if isinstance(node.op, ast.UAdd):
                return inner
            raise self.fail("unsupported unary operator")

        if isinstance(node, ast.BinOp):
            op = BINARY.get(type(node.op))
            if op is None:
                raise self.fail("unsupported operator")
            left, right = self.compile(node.left), self.compile(node.right)
            return lambda xs: op(left(xs), right(xs))

        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise self.fail("unknown function")
            if len(node.args) != 1 or node.keywords:
                raise self.fail(f"{node.func.id} takes exactly one argument")
            fn = FUNCTIONS[node.func.id]
            arg = self.compile(node.args[0])
            return lambda xs: fn(arg(xs))

        raise self.fail(f"unsupported syntax {type(node).__name__}")

    def _name(self, name: str) -> Node:
        if name in CONSTANTS:
            value = CONSTANTS[name]
            return lambda xs: value
        match = VARIABLE.match(name)
        if match is None:
            raise self.fail(f"unknown name {name!r}")
        index = int(match.group(1)) - 1
        if index >= self.arity:
            raise self.fail(f"{name} exceeds the {self.arity} declared time(s)")
        return lambda xs: xs[index]


def parse_body(text: str, arity: int, bound: float) -> BodyExpression:
    """Parse `text` into a body of exactly `arity` arguments."""
    if arity < 1:
        raise DomainError("empty time tuple")
    if not bound >= 0.0:
        raise DomainError("bound must be nonnegative")
    source = text.strip().replace("^", "**")
    if not source:
        raise DomainError("empty body expression")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as e:
        raise DomainError(f"bad body expression {text!r}: {e.msg}") from e
    node = _Compiler(text, arity).compile(tree)

    def func(*xs: Any) -> Any:
        if len(xs) != arity:
            raise DomainError(f"body takes {arity} argument(s), got {len(xs)}")
        shape = np.broadcast(*xs).shape
        return np.broadcast_to(np.asarray(node(xs)), shape)

    return BodyExpression(text, arity, float(bound), func)


def body_cylinder(text: str, times: Sequence[float], bound: float) -> CylinderFunction:
    """Cylinder function whose body is the expression `text` over x1..x<len(times)>."""
    body = parse_body(text, len(times), bound)
    return CylinderFunction(tuple(float(t) for t in times), body, body.bound)
