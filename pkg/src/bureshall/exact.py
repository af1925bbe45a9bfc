"""Exact arithmetic over the constants produced by the closed-form results.

Every exact table entry lives in the set pi^(p/2) * (a + b*ln2 + c*euler)
with big-rational a, b, c.  Gamma at positive half-integers and integers,
and digamma at the same points, close over this set, which is all the
entropy sums ever need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "ExactScalar",
    "gamma_exact",
    "digamma_exact",
    "to_float",
    "LN2",
    "EULER_GAMMA",
]

LN2 = 0.6931471805599453094
EULER_GAMMA = 0.5772156649015328606

_ZERO = Fraction(0)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


@dataclass(frozen=True)
class ExactScalar:
    """Value pi^(pi_half_power/2) * (const + ln2 * log(2) + euler * gamma_E).

    Addition requires matching pi powers (zero adapts to anything);
    multiplication requires at least one factor free of ln2/euler parts, so
    products never leave the representable set.
    """

    pi_half_power: int = 0
    const: Fraction = _ZERO
    ln2: Fraction = _ZERO
    euler: Fraction = _ZERO

    @classmethod
    def from_rational(cls, value) -> "ExactScalar":
        return cls(0, _as_fraction(value), _ZERO, _ZERO)

    @classmethod
    def zero(cls) -> "ExactScalar":
        return cls(0, _ZERO, _ZERO, _ZERO)

    @classmethod
    def one(cls) -> "ExactScalar":
        return cls(0, Fraction(1), _ZERO, _ZERO)

    @property
    def is_zero(self) -> bool:
        return self.const == 0 and self.ln2 == 0 and self.euler == 0

    @property
    def is_pure(self) -> bool:
        """True when the value is a rational times a power of sqrt(pi)."""
        return self.ln2 == 0 and self.euler == 0

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        if not isinstance(other, ExactScalar):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.pi_half_power != other.pi_half_power:
            raise ValueError(
                f"cannot add pi powers {self.pi_half_power}/2 and {other.pi_half_power}/2"
            )
        return ExactScalar(
            self.pi_half_power,
            self.const + other.const,
            self.ln2 + other.ln2,
            self.euler + other.euler,
        )

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(self.pi_half_power, -self.const, -self.ln2, -self.euler)

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "ExactScalar":
        if isinstance(other, (int, Fraction)):
            f = _as_fraction(other)
            return ExactScalar(self.pi_half_power, self.const * f, self.ln2 * f, self.euler * f)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        if not other.is_pure:
            if not self.is_pure:
                raise ValueError("cannot multiply two transcendental-bearing scalars")
            return other * self
        p = self.pi_half_power + other.pi_half_power
        f = other.const
        return ExactScalar(p, self.const * f, self.ln2 * f, self.euler * f)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactScalar":
        if isinstance(other, (int, Fraction)):
            f = _as_fraction(other)
            if f == 0:
                raise ZeroDivisionError("division by zero rational")
            return self * (1 / f)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        if not other.is_pure or other.const == 0:
            raise ValueError("can only divide by a nonzero pure scalar")
        inv = ExactScalar(-other.pi_half_power, 1 / other.const, _ZERO, _ZERO)
        return self * inv

    def to_float(self) -> float:
        pi_term = math.pi ** (self.pi_half_power / 2.0)
        return pi_term * (float(self.const) + float(self.ln2) * LN2 + float(self.euler) * EULER_GAMMA)

    def canonical(self) -> str:
        """Full canonical form "pi^(p/2)*(a + b*ln2 + c*euler)" for golden files."""
        return (
            f"pi^({self.pi_half_power}/2)*({self.const} + {self.ln2}*ln2"
            f" + {self.euler}*euler)"
        )

    def table_str(self) -> str:
        """Human-readable form used in emitted tables, e.g. "2*ln2 - 7/6"."""
        if self.is_zero:
            return "0"
        if self.pi_half_power != 0:
            return self.canonical()
        parts: list[tuple[Fraction, str]] = []
        if self.ln2 != 0:
            parts.append((self.ln2, "ln2"))
        if self.euler != 0:
            parts.append((self.euler, "euler"))
        if self.const != 0 or not parts:
            parts.append((self.const, ""))
        out = ""
        for i, (coef, sym) in enumerate(parts):
            mag = abs(coef)
            if sym and mag == 1:
                body = sym
            elif sym:
                body = f"{mag}*{sym}"
            else:
                body = f"{mag}"
            if i == 0:
                out = body if coef >= 0 else f"-{body}"
            else:
                out += f" + {body}" if coef >= 0 else f" - {body}"
        return out

    def __str__(self) -> str:
        return self.table_str()


def gamma_exact(x) -> ExactScalar:
    """Exact Gamma(x) for 2x an integer, x not a non-positive integer.

    Integer x gives a pure rational; half-integer x (of either sign) gives
    rational * sqrt(pi).
    """
    x = _as_fraction(x)
    if x.denominator not in (1, 2):
        raise ValueError(f"gamma_exact requires integer or half-integer, got {x}")
    if x.denominator == 1:
        if x <= 0:
            raise ValueError(f"gamma_exact pole at x={x}")
        return ExactScalar.from_rational(math.factorial(int(x) - 1))
    # climb negative half-integers up with Gamma(x) = Gamma(x+1)/x
    scale = Fraction(1)
    while x < Fraction(1, 2):
        scale *= x
        x += 1
    k = int(x - Fraction(1, 2))  # x = k + 1/2, k >= 0
    coef = Fraction(math.factorial(2 * k), 4**k * math.factorial(k)) / scale
    return ExactScalar(1, coef, _ZERO, _ZERO)


def digamma_exact(x) -> ExactScalar:
    """Exact psi(x) for 2x a positive integer.

    psi(k) = H_(k-1) - gamma_E; psi(k + 1/2) = 2*sum_(i<=k) 1/(2i-1)
    - 2*ln2 - gamma_E.
    """
    x = _as_fraction(x)
    if x <= 0 or x.denominator not in (1, 2):
        raise ValueError(f"digamma_exact requires positive integer or half-integer, got {x}")
    if x.denominator == 1:
        harmonic = sum((Fraction(1, i) for i in range(1, int(x))), _ZERO)
        return ExactScalar(0, harmonic, _ZERO, Fraction(-1))
    k = int(x - Fraction(1, 2))
    odd_harmonic = sum((Fraction(2, 2 * i - 1) for i in range(1, k + 1)), _ZERO)
    return ExactScalar(0, odd_harmonic, Fraction(-2), Fraction(-1))


def to_float(s: ExactScalar) -> float:
    """Numeric value of an exact scalar; cross-checks the float track."""
    return s.to_float()
