"""Hausdorff dimension formulas and estimators.

Closed forms (polynomial, single and doubly exponential φ), the numeric
lower bounds built from counts m_n and gaps ε_n, the liminf formula in terms
of L(n) = ln φ(n) alone, the Wang-Wu upper-bound table, and an empirical
box-counting estimate used as a cross-check.

Numeric bounds are liminfs; they are approximated by the minimum of the
partial ratios over a tail window [n_max/2, n_max].
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np

from cfextremes.core.cantor import ConstructionParams, gap_epsilon_log, log_count_m
from cfextremes.core.errors import DomainError
from cfextremes.core.growth import (
    Family,
    GrowthSpec,
    LogScalar,
    default_d,
    exact_param,
    log_log_phi,
)
from cfextremes.core.intervals import Interval, fraction_str

logger = logging.getLogger(__name__)

TAIL_WINDOW = 0.5

_HALF = Fraction(1, 2)


class Method(Enum):
    CLOSED_FORM = "closed_form"
    LEMMA46 = "lemma46"
    REMARK = "remark"
    BOX_COUNT = "box_count"
    WANG_WU_UPPER = "wang_wu_upper"
    INCLUSION_UPPER = "inclusion_upper"


@dataclass(frozen=True)
class DimEstimate:
    """A dimension value with the method that produced it.

    Attributes:
        value: In [0, 1]; a Fraction for table values, a float otherwise
        method: Which formula or estimator produced the value
        partials: (index, ratio) pairs showing convergence (empty for tables)
    """

    value: Fraction | float
    method: Method
    partials: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.value <= 1:
            raise DomainError(f"dimension {self.value} outside [0, 1]")

    def to_dict(self, include_partials: bool = True) -> dict[str, Any]:
        value = fraction_str(self.value) if isinstance(self.value, Fraction) else self.value
        out: dict[str, Any] = {"method": self.method.value, "value": value}
        if include_partials:
            out["partials"] = [list(p) for p in self.partials]
        return out


def _tail_min(ratios: np.ndarray, start_n: int, n_max: int, window: float) -> float:
    """Minimum of ratios[n - start_n] over n in [n_max*(1-window), n_max]."""
    first = max(start_n, int(math.ceil(n_max * (1 - window))))
    return float(np.min(ratios[first - start_n :]))


# ============================================================================
# NUMERIC LOWER BOUNDS
# ============================================================================

def lemma46_bound(
    log_m: Sequence[LogScalar],
    log_eps: Sequence[LogScalar],
    n_max: int,
    tail_window: float = TAIL_WINDOW,
) -> DimEstimate:
    """liminf ln(m_1...m_{n-1}) / (-ln(m_n ε_n)) from counts and gaps.

    ``log_m[k-1]`` is ln m_k and ``log_eps[k-1]`` is ln ε_k, k = 1..n_max.
    Sums are taken over ln ln m_k with log-sum-exp, so ln m_k may itself be
    far beyond the float range.

    Raises:
        DomainError: some m_n < 2, ε not strictly decreasing, or m_n ε_n >= 1.
    """
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    if len(log_m) < n_max or len(log_eps) < n_max:
        raise DomainError(f"need {n_max} counts and gaps, got {len(log_m)} and {len(log_eps)}")
    log_m, log_eps = list(log_m[:n_max]), list(log_eps[:n_max])
    ln2 = LogScalar.from_log(math.log(2.0))
    for k, lm in enumerate(log_m, 1):
        if not lm.ge(ln2):
            raise DomainError(f"m_{k} < 2")
    for k, le in enumerate(log_eps, 1):
        if not le.negative:
            raise DomainError(f"epsilon_{k} >= 1")
    for k in range(1, n_max):
        if not log_eps[k] < log_eps[k - 1]:
            raise DomainError(f"epsilon not strictly decreasing at n={k + 1}")

    mag_m = np.array([lm.magnitude() for lm in log_m])
    mag_e = np.array([le.magnitude() for le in log_eps])
    if np.any(mag_m >= mag_e):
        bad = int(np.argmax(mag_m >= mag_e)) + 1
        raise DomainError(f"m_{bad} * epsilon_{bad} >= 1")
    # numerator for n is the sum over k < n
    log_num = np.concatenate(([-np.inf], np.logaddexp.accumulate(mag_m)[:-1]))
    log_den = mag_e + np.log1p(-np.exp(mag_m - mag_e))
    ratios = np.exp(log_num - log_den)
    n_index = np.arange(1, n_max + 1)
    value = _tail_min(ratios, 1, n_max, tail_window)
    logger.debug("lemma46_bound(n_max=%d) -> %.6f", n_max, value)
    return DimEstimate(
        value=min(max(value, 0.0), 1.0),
        method=Method.LEMMA46,
        partials=tuple(zip(n_index.tolist(), ratios.tolist())),
    )


def construction_inputs(
    params: ConstructionParams, n_max: int
) -> tuple[list[LogScalar], list[LogScalar]]:
    """(ln m_k, ln ε_k) for k = 1..n_max from the level construction."""
    log_m = [log_count_m(params, k) for k in range(1, n_max + 1)]
    log_eps = [gap_epsilon_log(params, k) for k in range(1, n_max + 1)]
    return log_m, log_eps


def remark_bound(spec: GrowthSpec, n_max: int, tail_window: float = TAIL_WINDOW) -> DimEstimate:
    """liminf Σ_{k<=n} L(k) / (2 Σ_{k<=n} L(k) + L(n+1)), in log-log domain."""
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    ell = np.array([log_log_phi(spec, k) for k in range(1, n_max + 2)])
    with np.errstate(divide="ignore", invalid="ignore"):
        log_sum = np.logaddexp.accumulate(ell[:-1])
        log_den = np.logaddexp(math.log(2.0) + log_sum, ell[1:])
        ratios = np.where(np.isneginf(log_sum), 0.0, np.exp(log_sum - log_den))
    value = _tail_min(ratios, 1, n_max, tail_window)
    logger.debug("remark_bound(%s, n_max=%d) -> %.6g", spec.label, n_max, value)
    return DimEstimate(
        value=min(max(value, 0.0), 1.0),
        method=Method.REMARK,
        partials=tuple(zip(range(1, n_max + 1), ratios.tolist())),
    )


# ============================================================================
# TABLES
# ============================================================================

def _doubly_table(spec: GrowthSpec, b: Fraction) -> Fraction:
    alpha = exact_param(spec.alpha)
    if alpha < 1:
        return _HALF
    if alpha == 1:
        return 1 / (b + 1)
    return Fraction(0)


def closed_form_dim(spec: GrowthSpec) -> DimEstimate:
    """Exact dimension of E_φ for the three families.

    Polynomial φ gives 1. For φ = base^{n^α} the dimension jumps from 1 to 1/2
    at α = 1/2 (the critical case itself is 1/2). For φ = c^{b^{n^α}} it is
    1/2, 1/(b+1) or 0 as α is below, at or above 1; neither c nor β matters.
    """
    if spec.family is Family.POLYNOMIAL:
        value = Fraction(1)
    elif spec.family is Family.SINGLE_EXP:
        value = Fraction(1) if exact_param(spec.alpha) < _HALF else _HALF
    else:
        value = _doubly_table(spec, exact_param(spec.b))
    return DimEstimate(value=value, method=Method.CLOSED_FORM)


def wang_wu_upper(spec: GrowthSpec) -> DimEstimate:
    """dim of {a_n >= c^{b^{n^α}} infinitely often}: the upper bound for E_φ."""
    if spec.family is not Family.DOUBLY_EXP:
        raise DomainError("wang_wu_upper is defined for the doubly-exp family")
    upper = DimEstimate(value=_doubly_table(spec, exact_param(spec.b)), method=Method.WANG_WU_UPPER)
    assert upper.value >= closed_form_dim(spec).value
    return upper


def inclusion_upper_bound(spec: GrowthSpec, d: float | None = None, steps: int = 20) -> DimEstimate:
    """Upper bound through the inclusion in {a_n >= c^{d^{n^α}} i.o.}, 1 < d < b.

    Partials follow d_j = b - (b-1)/2^j toward b, where the bound reaches
    the value of :func:`wang_wu_upper`.
    """
    if spec.family is not Family.DOUBLY_EXP:
        raise DomainError("inclusion_upper_bound is defined for the doubly-exp family")
    d = default_d(spec) if d is None else d
    if not 1 < d < spec.b:
        raise DomainError(f"need 1 < d < b, got d={d}, b={spec.b}")
    partials = []
    for j in range(1, steps + 1):
        d_j = spec.b - (spec.b - 1) / 2**j
        partials.append((d_j, float(_doubly_table(spec, exact_param(d_j)))))
    return DimEstimate(
        value=_doubly_table(spec, exact_param(d)),
        method=Method.INCLUSION_UPPER,
        partials=tuple(partials),
    )


def dim_curve(
    base: GrowthSpec, parameter: str, grid: Sequence[float]
) -> list[tuple[float, Fraction]]:
    """closed_form_dim along a sweep of one GrowthSpec field.

    ``parameter`` is a GrowthSpec field name (``alpha``, ``b``, ``c``,
    ``beta``, ``power`` or ``base``).
    """
    rows: list[tuple[float, Fraction]] = []
    for value in grid:
        estimate = closed_form_dim(base.replace(**{parameter: float(value)}))
        rows.append((float(value), estimate.value))
    return rows


# ============================================================================
# BOX COUNTING
# ============================================================================

def _boxes_meeting(intervals: Sequence[Interval], delta: Fraction) -> int:
    """Closed grid boxes [jδ, (j+1)δ] in [0, 1] meeting the union."""
    k_boxes = math.ceil(1 / delta)
    count = 0
    last = -1
    for iv in intervals:
        lo = max(0, math.ceil(iv.left / delta) - 1, last + 1)
        hi = min(k_boxes - 1, math.floor(iv.right / delta))
        if hi >= lo:
            count += hi - lo + 1
            last = hi
    return count


def box_count_dim(intervals: Sequence[Interval], scales: Sequence[Fraction]) -> DimEstimate:
    """Least-squares slope of ln N(δ) against ln(1/δ), clamped to [0, 1].

    A box counts when its closure meets the closure of some interval, so a
    box touching the set only at an endpoint is counted.

    Raises:
        DomainError: fewer than 4 scales, a span under 3 octaves, or an
            interval outside [0, 1].
    """
    scales = sorted({Fraction(s) for s in scales}, reverse=True)
    if len(scales) < 4:
        raise DomainError(f"need at least 4 distinct scales, got {len(scales)}")
    if scales[0] / scales[-1] < 8:
        raise DomainError("scales must span at least 3 octaves")
    if any(not 0 < s <= 1 for s in scales):
        raise DomainError("scales must lie in (0, 1]")
    ivs = sorted(intervals, key=lambda iv: iv.left)
    if not ivs:
        raise DomainError("no intervals")
    if ivs[0].left < 0 or max(iv.right for iv in ivs) > 1:
        raise DomainError("intervals must lie in [0, 1]")

    counts = [_boxes_meeting(ivs, delta) for delta in scales]
    log_inv = np.array([math.log(1 / delta) for delta in scales])
    log_counts = np.log(np.array(counts, dtype=float))
    slope, _ = np.polyfit(log_inv, log_counts, 1)
    logger.debug("box_count_dim: counts %s -> slope %.4f", counts, slope)
    return DimEstimate(
        value=float(min(max(slope, 0.0), 1.0)),
        method=Method.BOX_COUNT,
        partials=tuple((float(x), float(c)) for x, c in zip(log_inv, counts)),
    )


def dyadic_scales(first: int, last: int, base: int = 2) -> list[Fraction]:
    """base^-first .. base^-last (triadic with base=3)."""
    return [Fraction(1, base**k) for k in range(first, last + 1)]
