"""Tiny arithmetic expression compiler for configuration files.

The accepted grammar is deliberately small: ``+ - * / **``, parentheses,
``sin``, ``cos``, ``exp``, numeric literals, the constants ``pi`` and ``e``,
and the variable names declared by the caller.  Expressions are parsed with
:mod:`ast` against a whitelist and evaluated with NumPy ufuncs, so compiled
callables vectorize over grids.
"""

from __future__ import annotations

import ast
import math

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_CONSTANTS = {"pi": math.pi, "e": math.e}

_ALLOWED = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
)


def compile_expression(source, variables):
    """Compile ``source`` into a callable of the positional ``variables``.

    Raises :class:`ConfigError` for syntax errors or disallowed constructs.
    """
    if not isinstance(source, str):
        raise ConfigError(f"expression must be a string, got {type(source).__name__}")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {source!r}: {exc.msg}") from None

    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ConfigError(
                f"expression {source!r}: {type(node).__name__} is not allowed"
            )
        if isinstance(node, ast.Call):
            if (
                not isinstance(node.func, ast.Name)
                or node.func.id not in _FUNCTIONS
                or node.keywords
            ):
                raise ConfigError(
                    f"expression {source!r}: only sin/cos/exp calls are allowed"
                )
        elif isinstance(node, ast.Name):
            if node.id not in _FUNCTIONS and node.id not in _CONSTANTS and node.id not in variables:
                raise ConfigError(
                    f"expression {source!r}: unknown name {node.id!r} "
                    f"(variables here: {', '.join(variables)})"
                )
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ConfigError(f"expression {source!r}: non-numeric literal")

    code = compile(tree, "<config-expression>", "eval")
    base_scope = dict(_FUNCTIONS)
    base_scope.update(_CONSTANTS)

    def evaluate(*args):
        if len(args) != len(variables):
            raise TypeError(
                f"expression {source!r} takes {len(variables)} argument(s): {variables}"
            )
        scope = dict(base_scope)
        scope.update(zip(variables, args))
        return eval(code, {"__builtins__": {}}, scope)

    evaluate.source = source
    evaluate.variables = tuple(variables)
    return evaluate
