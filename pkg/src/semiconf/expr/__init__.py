"""Scalar expressions with exact second-order jet evaluation."""
from .backend import BACKEND
from .parser import tokenize
from .scalar import ExprBundle, Jet2, ScalarExpr, eval_jet, parse

__all__ = ["BACKEND", "ExprBundle", "Jet2", "ScalarExpr", "eval_jet", "parse", "tokenize"]
