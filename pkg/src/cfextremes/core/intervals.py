from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

from cfextremes.core.errors import DomainError

Rational = Fraction


@dataclass(frozen=True)
class Interval:
    left: Fraction
    right: Fraction
    left_closed: bool = False
    right_closed: bool = False

    def __post_init__(self) -> None:
        if not self.left < self.right:
            raise DomainError(f"interval needs left < right, got [{self.left}, {self.right}]")

    @classmethod
    def closed(cls, left: Fraction, right: Fraction) -> Interval:
        return cls(Fraction(left), Fraction(right), True, True)

    @classmethod
    def open(cls, left: Fraction, right: Fraction) -> Interval:
        return cls(Fraction(left), Fraction(right), False, False)

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def contains(self, other: Interval) -> bool:
        """Containment of the closures (endpoint tags ignored)."""
        return self.left <= other.left and other.right <= self.right

    def meets(self, other: Interval) -> bool:
        """True if the closures intersect."""
        return self.left <= other.right and other.left <= self.right

    def to_dict(self) -> dict[str, object]:
        return {
            "left": fraction_str(self.left),
            "right": fraction_str(self.right),
            "left_closed": self.left_closed,
            "right_closed": self.right_closed,
        }


def fraction_str(value: Fraction) -> str:
    """Serialize a rational as ``num/den`` (no precision loss in JSON)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"not a rational: {text!r}") from e


class IntervalIndex:
    def __init__(self, intervals: list[Interval]) -> None:
        # assumes pairwise disjoint closures; sorting by left also sorts rights
        self._intervals = sorted(intervals, key=lambda iv: iv.left)
        self._lefts = [iv.left for iv in self._intervals]
        self._rights = [iv.right for iv in self._intervals]

    def __len__(self) -> int:
        return len(self._intervals)

    def __iter__(self):
        return iter(self._intervals)

    def meeting(self, left: Fraction, right: Fraction) -> range:
        """Index range of intervals whose closure meets [left, right]."""
        lo = bisect_left(self._rights, left)
        hi = bisect_right(self._lefts, right)
        return range(lo, max(lo, hi))

    def count_meeting(self, left: Fraction, right: Fraction) -> int:
        return len(self.meeting(left, right))

    def gaps(self) -> list[Fraction]:
        """Lengths of the gaps between consecutive intervals."""
        return [b.left - a.right for a, b in zip(self._intervals, self._intervals[1:])]
