"""Generalized polynomials: syntax trees, parser and rigorous evaluator."""

from .ast import (Add, Const, FracPart, GPExpr, IntPart, Mul, N, Neg, Pow, Var, complexity,
                  dist_to_Z_expr, floor, frac, has_brackets, lift, render, substitute)
from .evaluate import (DEFAULT, GPValue, PrecisionConfig, PrecisionExhausted, compare, decide, dist_to_Z,
                       eval_range, evaluate, frac_array, to_float)
from .parser import GRAMMAR, ParseError, UnknownConstant, parse, parse_const

__all__ = [
    "Add", "Const", "FracPart", "GPExpr", "IntPart", "Mul", "N", "Neg", "Pow", "Var",
    "complexity", "dist_to_Z_expr", "floor", "frac", "has_brackets", "lift", "render", "substitute",
    "DEFAULT", "GPValue", "PrecisionConfig", "PrecisionExhausted", "compare", "decide", "dist_to_Z",
    "eval_range", "evaluate", "frac_array", "to_float", "GRAMMAR", "ParseError", "UnknownConstant", "parse", "parse_const",
]
