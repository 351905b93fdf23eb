"""Sequences of ``t`` given as small arithmetic expressions, e.g. ``1+log(t)``."""
from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field

import numpy as np

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"log": np.log, "ln": np.log, "log2": np.log2, "log10": np.log10,
          "exp": np.exp, "sqrt": np.sqrt}
_CONSTS = {"pi": np.pi, "e": np.e}


class SequenceSyntaxError(ValueError):
    pass


def _check(node):
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        _check(node.operand)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        pass
    elif isinstance(node, ast.Name) and (node.id == "t" or node.id in _CONSTS):
        pass
    elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
          and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        _check(node.args[0])
    else:
        raise SequenceSyntaxError(f"unsupported expression element: {ast.dump(node)[:60]}")


def _eval(node, t):
    if isinstance(node, ast.Expression):
        return _eval(node.body, t)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, t), _eval(node.right, t))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, t))
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return t if node.id == "t" else _CONSTS[node.id]
    return _FUNCS[node.func.id](_eval(node.args[0], t))


@dataclass(frozen=True)
class SequenceExpr:
    """A callable ``t -> value`` parsed from text; ``^`` means power."""

    text: str
    _tree: ast.Expression = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        src = self.text.replace("^", "**").replace("×", "*").replace("÷", "/").replace("−", "-")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise SequenceSyntaxError(f"cannot parse {self.text!r}: {exc.msg}") from None
        _check(tree)
        object.__setattr__(self, "_tree", tree)

    def __call__(self, t):
        with np.errstate(all="ignore"):
            value = _eval(self._tree, np.asarray(t, dtype=float))
        return np.asarray(value, dtype=float) * np.ones_like(np.asarray(t, dtype=float))

    def __str__(self):
        return self.text


def parse_sequence(text: str) -> SequenceExpr:
    return SequenceExpr(text)
