"""Exact continued-fraction arithmetic.

Finite words, convergents, cylinder intervals and the running statistics
T_n (maximum) and S_n (sum) of the partial quotients. Every value here is an
exact integer or ``Fraction``; the only inexact input accepted is the
``mpmath.mpf`` given to :func:`expand_real`, and that routine certifies each
digit against a rigorous error interval before emitting it.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from math import prod

import mpmath

from cfextremes.core.errors import DomainError, PrecisionError
from cfextremes.core.intervals import Interval, Rational

logger = logging.getLogger(__name__)

# Mantissa bits required per digit by expand_real (plus a fixed margin).
BITS_PER_DIGIT = 4
PRECISION_MARGIN = 64


def required_precision(n: int) -> int:
    """Minimum ``precision_bits`` accepted by :func:`expand_real` for ``n`` digits."""
    return BITS_PER_DIGIT * n + PRECISION_MARGIN


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class CFWord:
    """Finite sequence of partial quotients a_1..a_n (all >= 1).

    The empty word is allowed; it names the whole unit interval (cylinder of
    order 0) but cannot be evaluated.
    """

    digits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        digits = tuple(self.digits)
        for a in digits:
            if isinstance(a, bool) or not isinstance(a, int):
                raise DomainError(f"partial quotients must be integers, got {a!r}")
            if a < 1:
                raise DomainError(f"partial quotients must be >= 1, got {a}")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def of(cls, digits: Iterable[int]) -> CFWord:
        return cls(tuple(int(a) for a in digits))

    @classmethod
    def parse(cls, text: str) -> CFWord:
        """Parse ``"1,2,2"`` (commas or whitespace)."""
        parts = [p for p in text.replace(",", " ").split() if p]
        try:
            return cls.of(int(p) for p in parts)
        except ValueError as e:
            raise DomainError(f"cannot parse digits from {text!r}") from e

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.digits)

    def __getitem__(self, index: int) -> int:
        return self.digits[index]

    def extend(self, *digits: int) -> CFWord:
        return CFWord(self.digits + tuple(digits))

    def prefix(self, k: int) -> CFWord:
        return CFWord(self.digits[:k])

    @property
    def is_canonical(self) -> bool:
        """Canonical finite form: last digit >= 2 whenever length >= 2."""
        return len(self.digits) < 2 or self.digits[-1] >= 2

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.digits) + "]"


@dataclass(frozen=True)
class ConvergentPair:
    """The n-th convergent p_n/q_n in lowest terms."""

    p: int
    q: int
    n: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class RealExpansion:
    """Digits produced by :func:`expand_real`.

    Attributes:
        word: The certified partial quotients.
        truncated: True when the input was an exact rational whose expansion
            ended before the requested number of digits.
    """

    word: CFWord
    truncated: bool = False


# ============================================================================
# CONVERGENTS AND EVALUATION
# ============================================================================

def _check_nonempty(word: CFWord) -> None:
    if len(word) == 0:
        raise DomainError("continued fraction word must be non-empty")


def convergent_state(word: CFWord) -> tuple[int, int, int, int]:
    """Return (p_n, q_n, p_{n-1}, q_{n-1}) for the whole word.

    Uses p_{-1}=1, q_{-1}=0, p_0=0, q_0=1, so the empty word gives (0, 1, 1, 0).
    """
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    for a in word:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    return p, q, p_prev, q_prev


def convergents(word: CFWord) -> tuple[ConvergentPair, ...]:
    """Convergents (p_k, q_k) for k = 1..n via the three-term recursion."""
    out: list[ConvergentPair] = []
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    for k, a in enumerate(word, start=1):
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(ConvergentPair(p=p, q=q, n=k))
    return tuple(out)


def evaluate_cf(word: CFWord) -> Rational:
    """Exact value of the finite continued fraction [a_1, ..., a_n]."""
    _check_nonempty(word)
    value = Fraction(0)
    for a in reversed(word.digits):
        value = 1 / (a + value)
    return value


# ============================================================================
# EXPANSION
# ============================================================================

def expand_rational(r: Rational) -> CFWord:
    """Canonical expansion of a rational in (0, 1) by Euclidean division."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise DomainError(f"expand_rational needs 0 < r < 1, got {r}")
    p, q = r.numerator, r.denominator
    digits: list[int] = []
    while p:
        a, rem = divmod(q, p)
        digits.append(a)
        p, q = rem, p
    # Euclid ends on a digit >= 2 whenever 0 < r < 1.
    return CFWord(tuple(digits))


def _ulp_radius(x: mpmath.mpf, precision_bits: int) -> tuple[Fraction, Fraction]:
    # man_exp yields gmpy2.mpz under the gmpy backend
    man, exp = (int(v) for v in x.man_exp)
    value = Fraction(man) * Fraction(2) ** exp
    radius = Fraction(2) ** (exp + abs(man).bit_length() - precision_bits)
    return value, radius


def expand_real(
    x: Fraction | mpmath.mpf,
    n: int,
    precision_bits: int | None = None,
) -> RealExpansion:
    """First ``n`` partial quotients of ``x`` by iterating the Gauss map.

    An ``mpf`` input is taken to carry an error of one ulp at
    ``precision_bits``; both ends of that error interval are expanded in exact
    integer arithmetic and a digit is only emitted when they agree. A
    ``Fraction`` input is exact and may terminate early (``truncated``).

    Raises:
        DomainError: x outside (0, 1), n < 1, or precision below 4n + 64.
        PrecisionError: the error interval straddles a cylinder boundary.
    """
    if n < 1:
        raise DomainError(f"need n >= 1 digits, got {n}")
    if precision_bits is None:
        precision_bits = required_precision(n)
    if precision_bits < required_precision(n):
        raise DomainError(
            f"precision_bits={precision_bits} below required {required_precision(n)} for n={n}"
        )

    if isinstance(x, Fraction):
        if not 0 < x < 1:
            raise DomainError(f"expand_real needs 0 < x < 1, got {x}")
        word = expand_rational(x)
        if len(word) < n:
            return RealExpansion(word, truncated=True)
        return RealExpansion(word.prefix(n))

    with mpmath.workprec(precision_bits):
        x = mpmath.mpf(x)
    if not 0 < x < 1:
        raise DomainError(f"expand_real needs 0 < x < 1, got {mpmath.nstr(x, 10)}")
    centre, radius = _ulp_radius(x, precision_bits)
    lo, hi = centre - radius, centre + radius
    if lo <= 0 or hi >= 1:
        raise PrecisionError("error interval leaves (0, 1)")

    # Each endpoint is tracked as an integer pair (p, q) with value p/q.
    a_p, a_q = lo.numerator, lo.denominator
    b_p, b_q = hi.numerator, hi.denominator
    digits: list[int] = []
    for k in range(1, n + 1):
        da, ra = divmod(a_q, a_p)
        db, rb = divmod(b_q, b_p)
        if da != db:
            raise PrecisionError(
                f"digit {k} uncertain: error interval spans {min(da, db)}..{max(da, db)}"
            )
        if ra == 0 or rb == 0:
            raise PrecisionError(f"error interval reaches a rational endpoint at digit {k}")
        digits.append(int(da))
        a_p, a_q = ra, a_p
        b_p, b_q = rb, b_p
    return RealExpansion(CFWord(tuple(digits)))


# ============================================================================
# STATISTICS, CYLINDERS, BOUNDS
# ============================================================================

def running_stats(word: CFWord) -> tuple[tuple[int, int], ...]:
    """(T_k, S_k) for k = 1..n: running maximum and running sum."""
    _check_nonempty(word)
    out: list[tuple[int, int]] = []
    t = s = 0
    for a in word:
        t = max(t, a)
        s += a
        out.append((t, s))
    return tuple(out)


def cylinder_interval(word: CFWord) -> tuple[Interval, Rational]:
    """The n-th order cylinder I(a_1..a_n) and its exact length.

    Endpoints are p_n/q_n and (p_n+p_{n-1})/(q_n+q_{n-1}); p_n/q_n is the
    left endpoint for even n. Returned as an open interval.
    """
    p, q, p_prev, q_prev = convergent_state(word)
    a = Fraction(p, q)
    b = Fraction(p + p_prev, q + q_prev)
    left, right = (a, b) if len(word) % 2 == 0 else (b, a)
    interval = Interval.open(left, right)
    length = Fraction(1, q * (q + q_prev))
    if length != right - left:
        raise AssertionError(f"cylinder length mismatch for {word}")
    return interval, length


def check_qn_bounds(word: CFWord) -> bool:
    """Product bounds a_1...a_n <= q_n <= (a_1+1)...(a_n+1)."""
    _, q, _, _ = convergent_state(word)
    return prod(word.digits) <= q <= prod(a + 1 for a in word.digits)
