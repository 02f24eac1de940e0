"""Growth functions φ and the thresholds built on them.

Three parametric families are supported:

- polynomial      φ(n) = n^p
- single-exp      φ(n) = base^{n^α}        (base defaults to e)
- doubly-exp      φ(n) = c^{b^{n^α}}

Everything is evaluated in log-domain. ``L(n) = ln φ(n)`` is kept as a float
while it stays below :data:`LOG_LOG_SWITCH`; beyond that the authoritative
field is ``ℓ(n) = ln L(n)`` (for the doubly exponential family
``ℓ(n) = n^α ln b + ln ln c``), which stays finite long after ``L(n)`` itself
overflows.

All "log" in this package is the natural logarithm.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np

from cfextremes.core.errors import BudgetError, DomainError, PrecisionError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Switch to the log-log representation once |ln x| exceeds this (below the
# ~709 ceiling of native doubles).
LOG_LOG_SWITCH = 700.0

# Largest φ(n), in bits, that exact-mode helpers will materialize.
EXACT_BIT_LIMIT = 1 << 16

# Relative slack for log-domain >= comparisons that are exact equalities in
# real arithmetic (e.g. f(2) = 2 for φ(n) = 2^n, β = 1).
_REL_TOL = 1e-12

_SCAN_LIMIT = 1_000_000
_SEARCH_LIMIT = 1 << 1000


# ============================================================================
# LOG SCALAR
# ============================================================================

def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@functools.total_ordering
@dataclass(frozen=True)
class LogScalar:
    """A positive real x stored as ln x (and ln|ln x| once |ln x| is huge).

    Attributes:
        log_value: ln x; may be +/-inf when |ln x| itself overflows a double.
        log_log_value: ln|ln x|, present once |ln x| > LOG_LOG_SWITCH and then
            authoritative. Quantities below 1 (gaps ε_n) have a negative
            ``log_value``; the log-log field still stores ln|ln x|.
    """

    log_value: float
    log_log_value: float | None = None

    @classmethod
    def from_log(cls, log_value: float) -> LogScalar:
        log_value = float(log_value)
        if math.isfinite(log_value) and abs(log_value) > LOG_LOG_SWITCH:
            return cls(log_value, math.log(abs(log_value)))
        return cls(log_value)

    @classmethod
    def from_log_log(cls, log_log_value: float, negative: bool = False) -> LogScalar:
        magnitude = _safe_exp(log_log_value)
        sign = -1.0 if negative else 1.0
        if magnitude > LOG_LOG_SWITCH:
            return cls(sign * magnitude, float(log_log_value))
        return cls(sign * magnitude)

    @property
    def negative(self) -> bool:
        """True when the represented quantity is below 1."""
        return self.log_value < 0

    def magnitude(self) -> float:
        """ln|ln x| (-inf when x == 1)."""
        if self.log_log_value is not None:
            return self.log_log_value
        if self.log_value == 0:
            return -math.inf
        return math.log(abs(self.log_value))

    def value(self) -> float:
        return _safe_exp(self.log_value)

    def shift(self, a: float) -> LogScalar:
        """ln(x * e^a): add a plain float to the logarithm."""
        if self.log_log_value is None:
            return LogScalar.from_log(self.log_value + a)
        ell = self.log_log_value
        s = -1.0 if self.negative else 1.0
        rel = 1.0 + s * a * math.exp(-ell)
        if rel <= 0:
            return LogScalar.from_log(s * math.exp(ell) + a)
        return LogScalar.from_log_log(ell + math.log(rel), negative=self.negative)

    def times(self, other: LogScalar) -> LogScalar:
        """ln(x * y)."""
        if self.log_log_value is None and other.log_log_value is None:
            return LogScalar.from_log(self.log_value + other.log_value)
        if self.log_log_value is None:
            return other.shift(self.log_value)
        if other.log_log_value is None:
            return self.shift(other.log_value)
        m1, m2 = self.magnitude(), other.magnitude()
        if self.negative == other.negative:
            return LogScalar.from_log_log(float(np.logaddexp(m1, m2)), negative=self.negative)
        big, small = (self, other) if m1 >= m2 else (other, self)
        mb, ms = max(m1, m2), min(m1, m2)
        if mb == ms:
            return LogScalar(0.0)
        return LogScalar.from_log_log(mb + math.log1p(-math.exp(ms - mb)), negative=big.negative)

    def _key(self) -> tuple[int, float]:
        if self.log_value > 0:
            return (1, self.magnitude())
        if self.log_value < 0:
            return (-1, -self.magnitude())
        return (0, 0.0)

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, LogScalar):
            return NotImplemented
        return self._key() < other._key()

    def ge(self, other: LogScalar, rel_tol: float = _REL_TOL) -> bool:
        """Tolerant ``self >= other``."""
        a, b = self.log_value, other.log_value
        if math.isfinite(a) and math.isfinite(b) and max(abs(a), abs(b)) <= LOG_LOG_SWITCH:
            return a >= b - rel_tol * max(1.0, abs(b))
        ka, kb = self._key(), other._key()
        if ka[0] != kb[0]:
            return ka[0] > kb[0]
        return ka[1] >= kb[1] - rel_tol * max(1.0, abs(kb[1]))

    def ge_log(self, threshold: float) -> bool:
        """Tolerant ``ln x >= threshold`` for a plain float threshold."""
        return self.ge(LogScalar.from_log(threshold))

    def to_dict(self) -> dict[str, Any]:
        return {
            "log_value": self.log_value if math.isfinite(self.log_value) else str(self.log_value),
            "log_log_value": self.log_log_value,
        }


# ============================================================================
# GROWTH SPEC
# ============================================================================

class Family(Enum):
    """Parametric family of φ."""

    POLYNOMIAL = "polynomial"
    SINGLE_EXP = "single"
    DOUBLY_EXP = "doubly"


@dataclass(frozen=True)
class GrowthSpec:
    """Parametrization of φ together with the target limit β.

    Attributes:
        family: Which parametric family φ belongs to
        beta: Target value of lim T_n/φ(n)
        power: p for the polynomial family
        alpha: α for the exponential families
        b: Inner base of the doubly exponential family
        c: Outer base of the doubly exponential family
        base: Base of the single exponential family (None means e)
    """

    family: Family
    beta: float = 1.0
    power: float | None = None
    alpha: float | None = None
    b: float | None = None
    c: float | None = None
    base: float | None = None

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.family is Family.POLYNOMIAL:
            if self.power is None or not self.power > 0:
                raise DomainError(f"polynomial family needs p > 0, got {self.power}")
        elif self.family is Family.SINGLE_EXP:
            if self.alpha is None or not self.alpha > 0:
                raise DomainError(f"single-exp family needs alpha > 0, got {self.alpha}")
            if self.base is not None and not self.base > 1:
                raise DomainError(f"single-exp base must be > 1, got {self.base}")
        else:
            if self.alpha is None or not self.alpha > 0:
                raise DomainError(f"doubly-exp family needs alpha > 0, got {self.alpha}")
            if self.b is None or not self.b > 1:
                raise DomainError(f"doubly-exp family needs b > 1, got {self.b}")
            if self.c is None or not self.c > 1:
                raise DomainError(f"doubly-exp family needs c > 1, got {self.c}")

    @classmethod
    def polynomial(cls, p: float, beta: float = 1.0) -> GrowthSpec:
        return cls(Family.POLYNOMIAL, beta=beta, power=p)

    @classmethod
    def single_exp(cls, alpha: float, beta: float = 1.0, base: float | None = None) -> GrowthSpec:
        return cls(Family.SINGLE_EXP, beta=beta, alpha=alpha, base=base)

    @classmethod
    def doubly_exp(cls, b: float, c: float, alpha: float, beta: float = 1.0) -> GrowthSpec:
        return cls(Family.DOUBLY_EXP, beta=beta, alpha=alpha, b=b, c=c)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GrowthSpec:
        """Build from a YAML/JSON mapping (``family`` plus its parameters)."""
        try:
            family = Family(str(data.get("family", "")).lower())
        except ValueError:
            raise DomainError(f"unknown family {data.get('family')!r}") from None

        def num(key: str) -> float | None:
            value = data.get(key)
            return None if value is None else float(value)

        return cls(
            family=family,
            beta=float(data.get("beta", 1.0)),
            power=num("p"),
            alpha=num("alpha"),
            b=num("b"),
            c=num("c"),
            base=num("base"),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family.value, "beta": self.beta}
        for key, value in (
            ("p", self.power),
            ("alpha", self.alpha),
            ("b", self.b),
            ("c", self.c),
            ("base", self.base),
        ):
            if value is not None:
                out[key] = value
        return out

    def replace(self, **changes: Any) -> GrowthSpec:
        data = {
            "family": self.family,
            "beta": self.beta,
            "power": self.power,
            "alpha": self.alpha,
            "b": self.b,
            "c": self.c,
            "base": self.base,
        }
        data.update(changes)
        return GrowthSpec(**data)

    @property
    def label(self) -> str:
        if self.family is Family.POLYNOMIAL:
            return f"n^{self.power:g}"
        if self.family is Family.SINGLE_EXP:
            base = "e" if self.base is None else f"{self.base:g}"
            return f"{base}^(n^{self.alpha:g})"
        return f"{self.c:g}^({self.b:g}^(n^{self.alpha:g}))"


def exact_param(value: float) -> Fraction:
    """The decimal a user typed (1.1 -> 11/10), not the binary float."""
    return Fraction(str(value))


# ============================================================================
# LOG-DOMAIN EVALUATION
# ============================================================================

def _ln_base(spec: GrowthSpec) -> float:
    return 1.0 if spec.base is None else math.log(spec.base)


def log_phi(spec: GrowthSpec, n: int) -> LogScalar:
    """L(n) = ln φ(n), switching to ℓ(n) = ln L(n) when L(n) is huge."""
    if n < 1:
        raise DomainError(f"log_phi needs n >= 1, got {n}")
    if spec.family is Family.POLYNOMIAL:
        return LogScalar.from_log(spec.power * math.log(n))
    if spec.family is Family.SINGLE_EXP:
        lnb = _ln_base(spec)
        big = spec.alpha * math.log(n) + math.log(lnb)
        if big > math.log(LOG_LOG_SWITCH):
            return LogScalar.from_log_log(big)
        return LogScalar.from_log(n**spec.alpha * lnb)
    exponent = n**spec.alpha * math.log(spec.b)
    ell = exponent + math.log(math.log(spec.c))
    if ell > math.log(LOG_LOG_SWITCH):
        return LogScalar.from_log_log(ell)
    return LogScalar.from_log(spec.b ** (n**spec.alpha) * math.log(spec.c))


def log_log_phi(spec: GrowthSpec, n: int) -> float:
    """ℓ(n) = ln L(n); -inf when φ(n) = 1."""
    return log_phi(spec, n).magnitude()


def bound_f(spec: GrowthSpec, n: int) -> LogScalar | None:
    """ln f(n) with f(n) = (β - 1/n) φ(n); None when f(n) <= 0."""
    coef = spec.beta - 1.0 / n
    if coef <= 0:
        return None
    return log_phi(spec, n).shift(math.log(coef))


def bound_g(spec: GrowthSpec, n: int) -> LogScalar:
    """ln g(n) with g(n) = (β + 1/n) φ(n)."""
    return log_phi(spec, n).shift(math.log(spec.beta + 1.0 / n))


# ============================================================================
# THRESHOLD N
# ============================================================================

def _threshold_conditions(spec: GrowthSpec, n: int) -> tuple[bool, bool, bool]:
    f = bound_f(spec, n)
    f_ok = f is not None and f.ge_log(LN2)
    g_ok = bound_g(spec, n + 1).ge(bound_g(spec, n))
    ratio_ok = log_phi(spec, n).shift(-math.log(n)).ge_log(LN2)
    return f_ok, g_ok, ratio_ok


def _tail_certified(spec: GrowthSpec, n: int) -> bool:
    """True once d/dn (L(n) - ln n) > 0 for all later n.

    For single-exp this is α ln(base) n^α > 1, for doubly-exp
    α ln b n^α L(n) > 1; both left-hand sides increase in n.
    """
    if spec.family is Family.SINGLE_EXP:
        return math.log(spec.alpha) + math.log(_ln_base(spec)) + spec.alpha * math.log(n) > 0
    if spec.family is Family.DOUBLY_EXP:
        return (
            math.log(spec.alpha)
            + math.log(math.log(spec.b))
            + spec.alpha * math.log(n)
            + log_log_phi(spec, n)
            > 0
        )
    return False


def threshold_holds(spec: GrowthSpec, n: int) -> bool:
    """All three threshold conditions at index n."""
    return all(_threshold_conditions(spec, n))


def _bisect_true(pred: Callable[[int], bool], lo: int, hi: int) -> int:
    """Least n in (lo, hi] with pred(n), given pred(lo) false and pred(hi) true."""
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _first_true(pred: Callable[[int], bool], lo: int) -> int:
    """Least n >= lo with pred(n), for a predicate that stays true once true."""
    if pred(lo):
        return lo
    hi = lo
    while not pred(hi):
        if hi > _SEARCH_LIMIT:
            raise DomainError(f"no qualifying index below 2^{_SEARCH_LIMIT.bit_length() - 1}")
        lo, hi = hi, 2 * hi
    return _bisect_true(pred, lo, hi)


def threshold_N(spec: GrowthSpec) -> int:
    """Least N with f(n) >= 2, g(n+1) >= g(n) and φ(n)/n >= 2 for all n >= N.

    Past the tail certificate index n_c, f(n) and φ(n)/n increase and
    g(n+1) >= g(n), so failures there form an initial segment of [n_c, ∞)
    found by doubling and bisection. Indices below n_c are scanned while
    n_c <= _SCAN_LIMIT. For larger n_c, L(n) - ln n decreases on [1, n_c]
    and f(n) increases, so failures below n_c are an initial segment too.

    Raises:
        DomainError: polynomial family, or no threshold below 2^1000.
    """
    if spec.family is Family.POLYNOMIAL:
        raise DomainError("threshold_N is defined for the exponential families only")
    n_c = _first_true(functools.partial(_tail_certified, spec), 1)
    holds = functools.partial(threshold_holds, spec)
    tail_start = _first_true(holds, n_c)
    if tail_start > n_c:
        N = tail_start
    elif n_c <= _SCAN_LIMIT:
        N = 1 + max((n for n in range(1, n_c) if not holds(n)), default=0)
    else:
        N = 1 if holds(1) else _bisect_true(holds, 1, n_c)
    logger.debug("threshold_N(%s): certificate at %d, N=%d", spec.label, n_c, N)
    return N


# ============================================================================
# UPPER-BOUND INCLUSION (E(b,c,α,β) ⊆ E*(d,c,α))
# ============================================================================

def default_delta(spec: GrowthSpec) -> float:
    """Half the supremum allowed by (β-δ)c > β+δ."""
    return spec.beta * (spec.c - 1) / (2 * (spec.c + 1))


def default_d(spec: GrowthSpec) -> float:
    return (spec.b + 1) / 2


def _check_inclusion_params(spec: GrowthSpec, d: float, delta: float) -> None:
    if spec.family is not Family.DOUBLY_EXP:
        raise DomainError("inclusion inequalities are defined for the doubly-exp family")
    if not 1 < d < spec.b:
        raise DomainError(f"need 1 < d < b, got d={d}, b={spec.b}")
    if not 0 < delta < spec.beta:
        raise DomainError(f"need 0 < delta < beta, got delta={delta}")
    if not (spec.beta - delta) * spec.c > spec.beta + delta:
        raise DomainError(
            f"need (beta - delta) * c > beta + delta; delta must be < "
            f"{spec.beta * (spec.c - 1) / (spec.c + 1):g}"
        )


def _record_bracket(spec: GrowthSpec, delta: float, n: int) -> float:
    """(β-δ) - (β+δ) φ(n)/φ(n+1), the factored form of the proof."""
    ell_n, ell_next = log_log_phi(spec, n), log_log_phi(spec, n + 1)
    # ln(L(n+1) - L(n)) without forming either L
    log_step = ell_next + math.log1p(-math.exp(ell_n - ell_next))
    ratio = math.exp(-_safe_exp(log_step))
    return (spec.beta - delta) - (spec.beta + delta) * ratio


def _gap_holds(spec: GrowthSpec, d: float, delta: float, n: int) -> bool:
    """(β-δ)φ(n+1) - (β+δ)φ(n) >= c^{d^{(n+1)^α}} in log-log form."""
    bracket = _record_bracket(spec, delta, n)
    if bracket <= 0:
        return False
    ell_next = log_log_phi(spec, n + 1)
    ell_d = (n + 1) ** spec.alpha * math.log(d) + math.log(math.log(spec.c))
    rel = 1.0 + math.log(bracket) * math.exp(-ell_next)
    if rel <= 0:
        return False
    return ell_next + math.log(rel) >= ell_d


def find_N0(spec: GrowthSpec, d: float, delta: float, horizon: int) -> int | None:
    """Least N0 <= horizon with the gap inequality holding on [N0, horizon].

    Returns None when the inequality fails at the horizon itself.
    """
    _check_inclusion_params(spec, d, delta)
    n0: int | None = None
    for n in range(horizon, 0, -1):
        if not _gap_holds(spec, d, delta, n):
            break
        n0 = n
    logger.debug("find_N0(%s, d=%g, delta=%g, horizon=%d) -> %s", spec.label, d, delta, horizon, n0)
    return n0


def verify_inclusion_inequalities(
    spec: GrowthSpec, d: float, delta: float, N0: int, n_max: int
) -> bool:
    """Check both inequalities of the inclusion argument on [N0, n_max].

    For every n: the record is forced, (β-δ)φ(n+1) > (β+δ)φ(n), so
    a_{n+1} >= T_{n+1} - T_n; and that difference is at least c^{d^{(n+1)^α}}.
    """
    _check_inclusion_params(spec, d, delta)
    for n in range(max(N0, 1), n_max + 1):
        if _record_bracket(spec, delta, n) <= 0:
            return False
        if not _gap_holds(spec, d, delta, n):
            return False
    return True


# ============================================================================
# EXACT φ (desk-scale construction)
# ============================================================================

def _check_bits(spec: GrowthSpec, n: int, max_bits: int) -> int:
    L = log_phi(spec, n)
    bits = L.log_value / LN2
    if not bits <= max_bits:
        raise BudgetError(f"phi({n}) needs ~{bits:.3g} bits, budget is {max_bits}")
    return max(int(bits) + 1, 1)


def phi_exact(spec: GrowthSpec, n: int, max_bits: int = EXACT_BIT_LIMIT) -> Fraction | None:
    """φ(n) as an exact rational, or None when it is not rational in general.

    Raises:
        BudgetError: φ(n) exceeds ``max_bits``.
    """
    _check_bits(spec, n, max_bits)
    if spec.family is Family.POLYNOMIAL:
        p = exact_param(spec.power)
        return Fraction(n) ** p.numerator if p.denominator == 1 else None
    alpha = exact_param(spec.alpha)
    if alpha.denominator != 1:
        return None
    m = n**alpha.numerator
    if spec.family is Family.SINGLE_EXP:
        if spec.base is None:
            return None
        return exact_param(spec.base) ** m
    exponent = exact_param(spec.b) ** m
    if exponent.denominator != 1:
        return None
    return exact_param(spec.c) ** exponent.numerator


def phi_mp(spec: GrowthSpec, n: int) -> mpmath.mpf:
    """φ(n) at the current mpmath working precision."""
    n_mp = mpmath.mpf(n)
    if spec.family is Family.POLYNOMIAL:
        return mpmath.power(n_mp, mpmath.mpf(str(spec.power)))
    inner = mpmath.power(n_mp, mpmath.mpf(str(spec.alpha)))
    if spec.family is Family.SINGLE_EXP:
        base = mpmath.e if spec.base is None else mpmath.mpf(str(spec.base))
        return mpmath.power(base, inner)
    b, c = mpmath.mpf(str(spec.b)), mpmath.mpf(str(spec.c))
    return mpmath.power(c, mpmath.power(b, inner))


def scaled_phi_round(
    spec: GrowthSpec,
    n: int,
    coef: Fraction,
    *,
    ceil: bool = False,
    max_bits: int = EXACT_BIT_LIMIT,
) -> int:
    """⌊coef·φ(n)⌋ (or ⌈coef·φ(n)⌉), exact or certified.

    Rational φ(n) is handled exactly. Otherwise φ(n) is evaluated with 128
    guard bits and the rounding is refused when the value sits within 2^-32
    of an integer.

    Raises:
        BudgetError: φ(n) exceeds ``max_bits``.
        PrecisionError: the rounding cannot be certified.
    """
    exact = phi_exact(spec, n, max_bits)
    if exact is not None:
        value = coef * exact
        return math.ceil(value) if ceil else math.floor(value)
    bits = _check_bits(spec, n, max_bits)
    with mpmath.workprec(bits + 128):
        value = mpmath.mpf(coef.numerator) / coef.denominator * phi_mp(spec, n)
        if abs(value - mpmath.nint(value)) < mpmath.ldexp(1, -32):
            raise PrecisionError(f"cannot certify rounding of {coef}*phi({n}) near an integer")
        return int(mpmath.ceil(value) if ceil else mpmath.floor(value))
