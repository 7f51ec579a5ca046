"""Expression parsing and exact differentiation up to third order."""

from .jets import Jet, Jet3, eval_jet, eval_jet3, eval_value
from .nodes import Expression, differentiate, to_source
from .parser import parse

__all__ = [
    "Expression",
    "Jet",
    "Jet3",
    "differentiate",
    "eval_jet",
    "eval_jet3",
    "eval_value",
    "parse",
    "to_source",
]
