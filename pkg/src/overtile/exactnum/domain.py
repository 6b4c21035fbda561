"""Comparison policies shared by the geometric modules.

``ExactDomain`` compares field elements exactly; ``FloatDomain`` compares
floats with an absolute tolerance.  Geometry code only ever asks a domain
for signs, so the same code runs in both modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .field import FieldContext, FieldElement

DEFAULT_EPS = 1e-9


class Mode(str, Enum):
    EXACT = "EXACT"
    FLOAT = "FLOAT"


class FloatModeUnsupported(ValueError):
    pass


@dataclass
class ExactDomain:
    ctx: FieldContext
    mode = Mode.EXACT

    def sign(self, a) -> int:
        if isinstance(a, FieldElement):
            return a.sign()
        return (a > 0) - (a < 0)

    def cmp(self, a, b) -> int:
        return self.sign(a - b)

    def eq(self, a, b) -> bool:
        return self.cmp(a, b) == 0

    def num(self, x):
        """Embed a rational (or field element) into the domain."""
        if isinstance(x, FieldElement):
            return x
        return self.ctx.const(Fraction(x))

    def to_float(self, a) -> float:
        return float(a)

    def min(self, a, b):
        return a if self.cmp(a, b) <= 0 else b

    def max(self, a, b):
        return a if self.cmp(a, b) >= 0 else b


@dataclass
class FloatDomain:
    eps: float = DEFAULT_EPS
    mode = Mode.FLOAT

    def sign(self, a) -> int:
        a = float(a)
        if abs(a) <= self.eps:
            return 0
        return 1 if a > 0 else -1

    def cmp(self, a, b) -> int:
        return self.sign(float(a) - float(b))

    def eq(self, a, b) -> bool:
        return self.cmp(a, b) == 0

    def num(self, x) -> float:
        return float(x)

    def to_float(self, a) -> float:
        return float(a)

    def min(self, a, b):
        return a if self.cmp(a, b) <= 0 else b

    def max(self, a, b):
        return a if self.cmp(a, b) >= 0 else b


def quantize(x: float, bits: int = 30) -> float:
    """Snap to the 2**-bits grid (used to key float positions)."""
    s = 2.0**bits
    return math.floor(x * s + 0.5) / s
