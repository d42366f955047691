from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact_arith import as_rational


@dataclass(frozen=True)
class SupportInterval:
    """Closed interval [a, b] with exact rational endpoints."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", as_rational(self.b))
        if not self.a < self.b:
            raise ValueError(f"empty support interval [{self.a}, {self.b}]")

    @property
    def width(self) -> Fraction:
        return self.b - self.a

    def to_unit(self, x) -> Fraction:
        """Affine map [a, b] -> [-1, 1]."""
        x = as_rational(x)
        return (2 * x - self.a - self.b) / self.width

    def contains(self, x) -> bool:
        x = as_rational(x)
        return self.a <= x <= self.b

    def __str__(self):
        return f"[{self.a}, {self.b}]"
