"""Saturating two's-complement fixed-point arithmetic.

This is the arithmetic contract shared by the simulator and the generated
hardware: every stored quantity lives in a signed two's-complement format of
1..32 bits, additions and subtractions clamp at the format rails instead of
wrapping, and exponential decay is realized as ``v - (v >> k)``, i.e.
multiplication by ``(1 - 2**-k)`` with floor rounding.

Consequences worth knowing:

* a positive value decays to the dead zone ``min(v, 2**k - 1)`` and then
  stops (the shifted term underflows to zero);
* a negative value decays all the way to exactly 0, because the arithmetic
  shift of a negative number never underflows past -1;
* decay never crosses zero and never increases magnitude, so it cannot
  overflow even before clamping.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class FxpFormat:
    """Signed two's-complement storage format of ``total_bits`` bits."""

    total_bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.total_bits <= 32:
            raise ValueError(f"total_bits must be in 1..32, got {self.total_bits}")

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    def contains(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw


@lru_cache(maxsize=None)
def _fmt(total_bits: int) -> FxpFormat:
    return FxpFormat(total_bits)


@dataclass(frozen=True)
class FxpValue:
    """An integer pinned to a format; construction rejects out-of-range raws."""

    raw: int
    fmt: FxpFormat

    def __post_init__(self) -> None:
        if not self.fmt.contains(self.raw):
            raise ValueError(
                f"raw value {self.raw} outside {self.fmt.total_bits}-bit range "
                f"[{self.fmt.min_raw}, {self.fmt.max_raw}]"
            )


def saturate(raw: int, fmt: FxpFormat) -> FxpValue:
    """Clamp an arbitrary integer into ``fmt``."""
    return FxpValue(min(max(raw, fmt.min_raw), fmt.max_raw), fmt)


def _check_same_fmt(a: FxpValue, b: FxpValue) -> None:
    if a.fmt != b.fmt:
        raise ValueError(
            f"format mismatch: {a.fmt.total_bits}-bit vs {b.fmt.total_bits}-bit"
        )


def sat_add(a: FxpValue, b: FxpValue) -> FxpValue:
    """Saturating addition; both operands must share a format."""
    _check_same_fmt(a, b)
    return saturate(a.raw + b.raw, a.fmt)


def sat_sub(a: FxpValue, b: FxpValue) -> FxpValue:
    """Saturating subtraction; both operands must share a format."""
    _check_same_fmt(a, b)
    return saturate(a.raw - b.raw, a.fmt)


def decay(v: FxpValue, shift: int) -> FxpValue:
    """One decay step: ``v - (v >> shift)`` with arithmetic (floor) shift."""
    if shift < 1:
        raise ValueError(f"decay shift must be >= 1, got {shift}")
    return saturate(v.raw - (v.raw >> shift), v.fmt)


def requantize(v: FxpValue, target: FxpFormat) -> FxpValue:
    """Move a value into another format, clamping when narrowing."""
    return saturate(v.raw, target)
