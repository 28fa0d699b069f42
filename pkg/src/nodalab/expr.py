"""Safe evaluation of small arithmetic expressions over numpy arrays.

Boundary data and mock fields are written as Python-syntax expressions, e.g.
``"sin(2*theta) + 0.5"`` or ``"max(x - 0.5, 0)**2"``.  Only numeric
literals, the names in :data:`VARIABLES`, the functions in :data:`FUNCTIONS`
and the operators ``+ - * / **`` are accepted.
"""

from __future__ import annotations

import ast

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "atan2": np.arctan2,
    "max": np.maximum,
    "min": np.minimum,
}
VARIABLES = ("theta", "s", "x", "y", "r")
CONSTANTS = {"pi": np.pi, "e": np.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExpressionError(ValueError):
    pass


def parse(text: str) -> ast.Expression:
    """Parse and validate; raises :class:`ExpressionError` with the offending piece."""
    if not isinstance(text, (str, int, float)):
        raise ExpressionError(f"expression must be a string, got {type(text).__name__}")
    try:
        tree = ast.parse(str(text), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Load)) or type(node) in _BINOPS:
            continue
        if isinstance(node, (ast.BinOp, ast.UnaryOp, ast.UAdd, ast.USub)):
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            continue
        if isinstance(node, ast.Name) and (node.id in VARIABLES or node.id in CONSTANTS or node.id in FUNCTIONS):
            continue
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS and not node.keywords:
            continue
        raise ExpressionError(f"unsupported element {ast.dump(node)[:40]!r} in {text!r}")
    return tree


def variables_used(text: str) -> set[str]:
    return {n.id for n in ast.walk(parse(text)) if isinstance(n, ast.Name) and n.id in VARIABLES}


def evaluate(text: str, **env) -> np.ndarray:
    tree = parse(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in CONSTANTS:
                return CONSTANTS[node.id]
            if node.id not in env:
                raise ExpressionError(f"variable {node.id!r} is not available here")
            return env[node.id]
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call):
            return FUNCTIONS[node.func.id](*[ev(a) for a in node.args])
        raise ExpressionError(f"cannot evaluate {ast.dump(node)[:40]}")

    with np.errstate(all="ignore"):
        return ev(tree)
