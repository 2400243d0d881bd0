"""Random expression ASTs for round-trip property tests."""

import numpy as np

from collagebvp.expr import (
    EvalDomainError,
    Expression,
    _Binary,
    _Call,
    _Constant,
    _Negate,
    _Number,
    _Variable,
)

BIN_OPS = ("+", "-", "*", "/", "^")
FUNCTIONS = ("sin", "cos", "exp", "sqrt", "log", "abs")


def random_node(rng, depth):
    if depth <= 0 or rng.random() < 0.3:
        choice = int(rng.integers(0, 4))
        if choice == 0:
            return _Number(0, float(rng.uniform(0.1, 3.0)))
        if choice == 1:
            return _Variable(0)
        if choice == 2:
            return _Constant(0, "e")
        return _Constant(0, "pi")
    kind = int(rng.integers(0, 4))
    if kind <= 1:
        op = BIN_OPS[int(rng.integers(0, len(BIN_OPS)))]
        return _Binary(0, op, random_node(rng, depth - 1), random_node(rng, depth - 1))
    if kind == 2:
        return _Negate(0, random_node(rng, depth - 1))
    fn = FUNCTIONS[int(rng.integers(0, len(FUNCTIONS)))]
    return _Call(0, fn, random_node(rng, depth - 1))


def random_expression(rng, max_depth=5):
    return Expression(random_node(rng, int(rng.integers(1, max_depth + 1))))


def outcome(expr, x):
    """('ok', value) or ('domain',); offsets differ between original and
    re-parsed trees, so only the error kind is comparable."""
    try:
        return ("ok", expr(x))
    except EvalDomainError:
        return ("domain",)


def same_outcome(a, b):
    if a[0] != b[0]:
        return False
    if a[0] == "domain":
        return True
    va, vb = a[1], b[1]
    if np.isnan(va) and np.isnan(vb):
        return True
    return va == vb
