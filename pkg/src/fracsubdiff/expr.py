"""A tiny arithmetic-expression language for problem files.

Supported: numbers, ``+ - * /``, ``**`` and ``pow(a, b)``, unary minus, and the
functions ``sin``, ``cos``, ``exp``, ``gamma``. Names resolve against a fixed
set of variables supplied at evaluation time plus the constants ``pi`` and
``e``. Everything else is rejected at parse time.

>>> f = compile_expression("t**2 * sin(pi*x)", ("x", "t"))
>>> float(f(0.5, 2.0))
4.0
"""

from __future__ import annotations

import ast
import math
from collections.abc import Callable, Sequence

import numpy as np
from scipy import special

__all__ = ["ExpressionError", "compile_expression"]


class ExpressionError(ValueError):
    pass


_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "gamma": special.gamma,
    "pow": np.power,
}
_CONSTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _check(node: ast.AST, names: set[str]) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, names)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left, names)
        _check(node.right, names)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ExpressionError(f"unary operator {type(node.op).__name__} not allowed")
        _check(node.operand, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError(f"unknown function in {ast.unparse(node)!r}")
        if node.keywords:
            raise ExpressionError("keyword arguments not allowed")
        want = 2 if node.func.id == "pow" else 1
        if len(node.args) != want:
            raise ExpressionError(f"{node.func.id} takes {want} argument(s)")
        for a in node.args:
            _check(a, names)
    elif isinstance(node, ast.Name):
        if node.id not in names and node.id not in _CONSTS:
            raise ExpressionError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported literal {node.value!r}")
    else:
        raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


def _eval(node: ast.AST, env: dict):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env)
        return np.negative(v) if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](*(_eval(a, env) for a in node.args))
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else _CONSTS[node.id]
    return float(node.value)


def compile_expression(
    source: str | float | int,
    variables: Sequence[str],
    constants: dict[str, float] | None = None,
) -> Callable:
    """Compile ``source`` into a vectorized callable of ``variables``.

    ``constants`` (e.g. ``alpha``) are bound at compile time. The result
    broadcasts over numpy arrays and always returns an array of the broadcast
    shape of its arguments.
    """
    constants = dict(constants or {})
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        source = repr(float(source))
    if not isinstance(source, str):
        raise ExpressionError(f"expression must be a string or number, got {type(source).__name__}")
    try:
        tree = ast.parse(source.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None
    names = set(variables) | set(constants)
    _check(tree, names)
    body = tree.body
    variables = tuple(variables)

    def fn(*args):
        if len(args) != len(variables):
            raise TypeError(f"expected {len(variables)} arguments, got {len(args)}")
        arrays = [np.asarray(a, dtype=np.float64) for a in args]
        env = dict(constants)
        env.update(zip(variables, arrays))
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        with np.errstate(all="ignore"):
            out = _eval(body, env)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), shape).copy()

    fn.source = source
    return fn
