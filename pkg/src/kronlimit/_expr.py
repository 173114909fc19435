"""Tiny safe evaluator for numeric expressions in catalog files and CLI flags.

Accepts things like ``"i"``, ``"2i"``, ``"(1+sqrt(3)i)/2"``, ``"log((1+sqrt(5))/2)/2"``.
Only arithmetic, a handful of functions and the constants ``pi``, ``e``, ``i`` are allowed.
"""

from __future__ import annotations

import ast
import operator
import re
from fractions import Fraction

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = ("sqrt", "log", "exp", "cos", "sin")

# "2i", "3)i", "2 i" -> explicit multiplication
_IMPLICIT_I = re.compile(r"(?<=[\d\)\.])\s*(?=[ij]\b)")


def _prepare(text: str) -> ast.Expression:
    src = _IMPLICIT_I.sub("*", text.strip())
    try:
        return ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse numeric expression {text!r}") from exc


def evaluate(text: str, mp):
    """Evaluate ``text`` in the mpmath context ``mp`` (real or complex result)."""
    names = {"pi": mp.pi, "e": mp.e, "i": mp.mpc(0, 1), "j": mp.mpc(0, 1), "I": mp.mpc(0, 1)}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            # floats go through their decimal text to avoid binary rounding
            return mp.mpf(repr(node.value)) if isinstance(node.value, float) else mp.mpf(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return names[node.id]
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return getattr(mp, node.func.id)(ev(node.args[0]))
        raise ValueError(f"unsupported expression element: {ast.dump(node)}")

    return ev(_prepare(text))


def as_fraction(text) -> Fraction | None:
    """Exact rational value of ``text`` if it is a plain rational literal, else None."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    try:
        return Fraction(str(text).replace(" ", ""))
    except (ValueError, ZeroDivisionError):
        return None
