"""Extended-real arithmetic for risk and uncertainty values.

Optimal risks are infima and may be genuinely infinite (continuous
entropies diverge), so every risk-valued quantity in the engine is an
extended real: a finite float or an exact signed infinity.  Arithmetic
is total for the combinations the engine produces; the one undefined
case, same-signed infinity minus infinity, raises instead of silently
turning into NaN the way raw float arithmetic would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UndefinedArithmeticError


@dataclass(frozen=True)
class ExtendedReal:
    """A float value that may be exactly +inf or -inf, never NaN."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise UndefinedArithmeticError("extended real cannot hold NaN")
        object.__setattr__(self, "value", v)

    # -- constructors -----------------------------------------------------
    @classmethod
    def finite(cls, value: float) -> "ExtendedReal":
        v = float(value)
        if math.isinf(v):
            raise UndefinedArithmeticError("finite() called with an infinity")
        return cls(v)

    @classmethod
    def pos_inf(cls) -> "ExtendedReal":
        return cls(math.inf)

    @classmethod
    def neg_inf(cls) -> "ExtendedReal":
        return cls(-math.inf)

    # -- predicates ---------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def is_pos_inf(self) -> bool:
        return self.value == math.inf

    @property
    def is_neg_inf(self) -> bool:
        return self.value == -math.inf

    def finite_value(self) -> float:
        """Return the float value, raising if it is infinite."""
        if not self.is_finite:
            raise UndefinedArithmeticError(f"expected a finite value, got {self}")
        return self.value

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "ExtendedReal | float") -> "ExtendedReal":
        o = _coerce(other)
        if self.is_pos_inf and o.is_neg_inf or self.is_neg_inf and o.is_pos_inf:
            raise UndefinedArithmeticError("inf + (-inf) is undefined")
        return ExtendedReal(self.value + o.value)

    __radd__ = __add__

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal(-self.value)

    def __sub__(self, other: "ExtendedReal | float") -> "ExtendedReal":
        o = _coerce(other)
        if (self.is_pos_inf and o.is_pos_inf) or (self.is_neg_inf and o.is_neg_inf):
            raise UndefinedArithmeticError("inf - inf is undefined")
        return ExtendedReal(self.value - o.value)

    def scaled(self, weight: float) -> "ExtendedReal":
        """Multiply by a nonnegative weight with the 0 * inf = 0 convention."""
        if weight < 0:
            raise UndefinedArithmeticError("scaled() requires a nonnegative weight")
        if weight == 0.0:
            return ExtendedReal(0.0)
        return ExtendedReal(weight * self.value)

    # -- comparisons (total order through the float value) -------------------
    def __lt__(self, other):
        return self.value < _coerce(other).value

    def __le__(self, other):
        return self.value <= _coerce(other).value

    def __gt__(self, other):
        return self.value > _coerce(other).value

    def __ge__(self, other):
        return self.value >= _coerce(other).value

    def __float__(self) -> float:
        return self.value

    def render(self) -> "float | str":
        """JSON-friendly form: plain float when finite, 'inf'/'-inf' otherwise."""
        if self.is_pos_inf:
            return "inf"
        if self.is_neg_inf:
            return "-inf"
        return self.value

    def __repr__(self) -> str:
        if self.is_pos_inf:
            return "ExtendedReal(+inf)"
        if self.is_neg_inf:
            return "ExtendedReal(-inf)"
        return f"ExtendedReal({self.value!r})"


def _coerce(x: "ExtendedReal | float") -> ExtendedReal:
    return x if isinstance(x, ExtendedReal) else ExtendedReal(float(x))


POS_INF = ExtendedReal.pos_inf()
NEG_INF = ExtendedReal.neg_inf()
ZERO = ExtendedReal(0.0)
