"""Exact arithmetic kernel: rationals, polynomials over Q, and Q(beta)."""

from . import poly
from .domain import DEFAULT_EPS, ExactDomain, FloatDomain, FloatModeUnsupported, Mode
from .field import ContextMismatch, DivisionByZero, FieldContext, FieldElement
from .roots import NoPositiveRoot, RootTieError, count_roots, isolate_pf_root, sturm_sequence

__all__ = [
    "poly",
    "DEFAULT_EPS",
    "ExactDomain",
    "FloatDomain",
    "FloatModeUnsupported",
    "Mode",
    "ContextMismatch",
    "DivisionByZero",
    "FieldContext",
    "FieldElement",
    "NoPositiveRoot",
    "RootTieError",
    "count_roots",
    "isolate_pf_root",
    "sturm_sequence",
]
