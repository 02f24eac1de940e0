"""Nested Cantor-like construction inside E_φ.

Digits are free (1 ≤ σ_k ≤ ⌊φ(k)/k⌋ + 1) before the threshold N and pinned
to the integer interval [⌈f(k)⌉, ⌊g(k)⌋] from N on. A level-n node
J(σ_1..σ_n) is the union of the closures of the admissible child cylinders
I(σ_1..σ_n, σ_{n+1}); since the child cylinders are adjacent, that union is a
single closed interval with exact rational endpoints.

Exact mode enumerates nodes (desk-scale specs only, bounded by a node
budget). Log-only mode computes counts m_n and gaps ε_n without enumeration
and is what the genuine doubly exponential specs run in.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import prod
from typing import Any

import numpy as np

from cfextremes.core.cf_core import CFWord, convergent_state
from cfextremes.core.errors import BudgetError, DomainError
from cfextremes.core.growth import (
    EXACT_BIT_LIMIT,
    LN2,
    GrowthSpec,
    LogScalar,
    bound_f,
    bound_g,
    exact_param,
    log_phi,
    phi_exact,
    scaled_phi_round,
    threshold_N,
)
from cfextremes.core.intervals import Interval, IntervalIndex, fraction_str

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**6


# ============================================================================
# PARAMETERS
# ============================================================================

class Mode(Enum):
    EXACT = "exact"
    LOG_ONLY = "log_only"


@dataclass(frozen=True)
class ConstructionParams:
    """Growth spec plus the index N from which digits are pinned to [f, g].

    Attributes:
        spec: Growth function and target β
        N: First pinned index (>= 1)
        mode: EXACT enumerates nodes; LOG_ONLY only evaluates counts and gaps
        budget: Maximum number of nodes build_levels may create
        max_bits: Largest φ(k) (in bits) exact mode will materialize
    """

    spec: GrowthSpec
    N: int
    mode: Mode = Mode.EXACT
    budget: int = DEFAULT_BUDGET
    max_bits: int = EXACT_BIT_LIMIT

    def __post_init__(self) -> None:
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.budget < 1:
            raise DomainError(f"budget must be >= 1, got {self.budget}")

    @classmethod
    def for_spec(
        cls,
        spec: GrowthSpec,
        N: int | None = None,
        mode: Mode = Mode.EXACT,
        budget: int = DEFAULT_BUDGET,
    ) -> ConstructionParams:
        """Use the threshold scan for N unless an override is given."""
        return cls(spec=spec, N=threshold_N(spec) if N is None else N, mode=mode, budget=budget)

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "N": self.N,
            "mode": self.mode.value,
            "budget": self.budget,
        }


# ============================================================================
# SYMBOL CLASSES, COUNTS, GAPS
# ============================================================================

def _softplus(t: LogScalar) -> LogScalar:
    """ln(x + 1) given t = ln x."""
    if t.log_log_value is not None:
        return t
    return LogScalar.from_log(float(np.logaddexp(t.log_value, 0.0)))


def _log_free_bound(spec: GrowthSpec, k: int) -> LogScalar:
    """ln(φ(k)/k + 1)."""
    return _softplus(log_phi(spec, k).shift(-math.log(k)))


def symbol_range(
    params: ConstructionParams, k: int
) -> tuple[int, int] | tuple[LogScalar, LogScalar]:
    """Admissible digits at position k.

    Returns (1, ⌊φ(k)/k⌋ + 1) for k < N and (⌈f(k)⌉, ⌊g(k)⌋) for k >= N. In
    log-only mode the endpoints come back as LogScalars, for k < N the upper
    one is ln(φ(k)/k + 1).

    Raises:
        BudgetError: φ(k) exceeds the exact bit budget.
        DomainError: the pinned integer interval is empty.
    """
    if k < 1:
        raise DomainError(f"symbol_range needs k >= 1, got {k}")
    spec = params.spec
    if params.mode is Mode.LOG_ONLY:
        if k < params.N:
            return LogScalar(0.0), _log_free_bound(spec, k)
        f = bound_f(spec, k)
        if f is None:
            raise DomainError(f"f({k}) <= 0; N={params.N} is below the threshold")
        return f, bound_g(spec, k)

    if k < params.N:
        return 1, scaled_phi_round(spec, k, Fraction(1, k), max_bits=params.max_bits) + 1
    beta = exact_param(spec.beta)
    lo = scaled_phi_round(spec, k, beta - Fraction(1, k), ceil=True, max_bits=params.max_bits)
    hi = scaled_phi_round(spec, k, beta + Fraction(1, k), max_bits=params.max_bits)
    lo = max(lo, 1)
    if lo > hi:
        raise DomainError(f"no integer digit in [f({k}), g({k})]")
    return lo, hi


def log_count_m(params: ConstructionParams, n: int) -> LogScalar:
    """ln m_n, with m_n = ⌊φ(n)/n⌋ + 1 approximated by φ(n)/n + 1."""
    if n < 1:
        raise DomainError(f"count_m needs n >= 1, got {n}")
    return _log_free_bound(params.spec, n)


def count_m(params: ConstructionParams, n: int) -> int | LogScalar:
    """m_n = ⌊φ(n)/n⌋ + 1, exactly when it fits the bit budget."""
    if n < 1:
        raise DomainError(f"count_m needs n >= 1, got {n}")
    if params.mode is Mode.EXACT:
        try:
            return scaled_phi_round(params.spec, n, Fraction(1, n), max_bits=params.max_bits) + 1
        except BudgetError:
            logger.debug("count_m(%d): exact value over budget, using log-domain", n)
    return log_count_m(params, n)


def _log_factor(params: ConstructionParams, k: int) -> LogScalar:
    """ln X_k, the k-th factor of the gap product."""
    if k < params.N:
        return _log_free_bound(params.spec, k)
    return bound_g(params.spec, k)


def gap_epsilon_log(params: ConstructionParams, n: int) -> LogScalar:
    """ln ε_n = -(2n+3) ln 2 - 2 Σ_{k<=n} ln X_k.

    X_k is φ(k)/k + 1 before N and g(k) from N on. The sum is accumulated over
    ln ln X_k with log-sum-exp once any term has left the float range.
    """
    if n < 0:
        raise DomainError(f"gap_epsilon_log needs n >= 0, got {n}")
    head = (2 * n + 3) * LN2
    terms = [_log_factor(params, k) for k in range(1, n + 1)]
    if all(t.log_log_value is None for t in terms):
        total = head + 2.0 * sum(t.log_value for t in terms)
        return LogScalar.from_log(-total)
    log_sum = float(np.logaddexp.reduce([t.magnitude() for t in terms]))
    # ln(2S + head) with S = e^{log_sum}
    ell = LN2 + log_sum + math.log1p(head * math.exp(-log_sum) / 2)
    return LogScalar.from_log_log(ell, negative=True)


def gap_epsilon_exact(params: ConstructionParams, n: int) -> Fraction:
    """ε_n as an exact rational (ε_0 = 1/8).

    Raises:
        DomainError: φ is not rational-valued for this spec.
    """
    if n < 0:
        raise DomainError(f"gap_epsilon_exact needs n >= 0, got {n}")
    spec = params.spec
    beta = exact_param(spec.beta)
    product = Fraction(1)
    for k in range(1, n + 1):
        phi = phi_exact(spec, k, params.max_bits)
        if phi is None:
            raise DomainError(f"phi({k}) is not rational for {spec.label}")
        if k < params.N:
            product *= phi / k + 1
        else:
            product *= (beta + Fraction(1, k)) * phi
    return 1 / (2 ** (2 * n + 3) * product**2)


def tn_ratio_envelope(params: ConstructionParams, n: int, t_prefix_max: int) -> tuple[float, float]:
    """Bounds on T_n/φ(n) for any point of the construction, n >= N.

    ``t_prefix_max`` is T_{N-1}, the largest free digit. The envelope is
    f(n)/φ(n) <= T_n/φ(n) <= (T_{N-1} + g(n))/φ(n).
    """
    if n < params.N:
        raise DomainError(f"envelope holds for n >= N={params.N}, got {n}")
    beta = params.spec.beta
    phi = log_phi(params.spec, n)
    return beta - 1.0 / n, beta + 1.0 / n + t_prefix_max * math.exp(-phi.log_value)


def holder_constant(
    log_m: list[LogScalar], log_eps: list[LogScalar], s: float, n: int
) -> float:
    """2^s / ((m_1...m_{n-1}) m_n^s ε_n^s), the mass-distribution constant.

    ``log_m[k-1]`` is ln m_k and ``log_eps[k]`` is ln ε_k (index 0 is ε_0).
    """
    log_c = (
        s * LN2
        - sum(lm.log_value for lm in log_m[: n - 1])
        - s * log_m[n - 1].log_value
        - s * log_eps[n].log_value
    )
    return math.exp(log_c)


# ============================================================================
# LEVEL TREE
# ============================================================================

@dataclass(frozen=True)
class LevelNode:
    """One level interval J(σ_1..σ_n).

    Attributes:
        digits: σ_1..σ_n (empty for the root)
        interval: Closed interval with exact endpoints
        parent: Index of the parent in the previous level (None for the root)
    """

    digits: CFWord
    interval: Interval
    parent: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "digits": list(self.digits),
            "interval": self.interval.to_dict(),
            "parent": self.parent,
        }


@dataclass(frozen=True)
class LevelTree:
    """Explicit finite-depth realization of the nested sets E_n.

    Attributes:
        params: Construction parameters used
        depth: Deepest level built
        ranges: (lo_k, hi_k) for k = 1..depth+1 (the last one shapes the leaves)
        levels: levels[n] is the tuple of level-n nodes, sorted by left endpoint
        counts: m_1..m_depth
        log_eps: ln ε_n for n = 0..depth
    """

    params: ConstructionParams
    depth: int
    ranges: tuple[tuple[int, int], ...]
    levels: tuple[tuple[LevelNode, ...], ...]
    counts: tuple[int, ...]
    log_eps: tuple[LogScalar, ...] = field(default=())

    def nodes(self, n: int) -> tuple[LevelNode, ...]:
        return self.levels[n]

    def intervals(self, n: int) -> list[Interval]:
        return [node.interval for node in self.levels[n]]

    def children(self, n: int, index: int) -> Iterator[LevelNode]:
        """Nodes of level n+1 whose parent is levels[n][index]."""
        return (node for node in self.levels[n + 1] if node.parent == index)

    def node_count(self) -> int:
        return sum(len(level) for level in self.levels)

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "depth": self.depth,
            "ranges": [list(r) for r in self.ranges],
            "counts": list(self.counts),
            "log_eps": [e.to_dict() for e in self.log_eps],
            "levels": [[node.to_dict() for node in level] for level in self.levels],
        }


def _child_span(word: CFWord, lo: int, hi: int) -> Interval:
    """Union of closures of I(word, j) for lo <= j <= hi."""
    p, q, p_prev, q_prev = convergent_state(word)

    def point(t: int) -> Fraction:
        return Fraction(t * p + p_prev, t * q + q_prev)

    a, b = point(lo), point(hi + 1)
    return Interval.closed(min(a, b), max(a, b))


def build_levels(params: ConstructionParams, depth: int, budget: int | None = None) -> LevelTree:
    """Enumerate every admissible word up to ``depth`` with exact intervals.

    Raises:
        DomainError: called in log-only mode, or a level has fewer than m_n
            children per node.
        BudgetError: the node count would exceed the budget (the message
            names the level).
    """
    if params.mode is not Mode.EXACT:
        raise DomainError("build_levels needs exact mode")
    if depth < 0:
        raise DomainError(f"depth must be >= 0, got {depth}")
    budget = params.budget if budget is None else budget

    ranges: list[tuple[int, int]] = []
    counts: list[int] = []
    total = 1
    width = 1
    for k in range(1, depth + 1):
        lo, hi = symbol_range(params, k)
        m = count_m(params, k)
        if hi - lo + 1 < m:
            raise DomainError(f"level {k}: {hi - lo + 1} children per node, fewer than m_{k}={m}")
        width *= hi - lo + 1
        total += width
        if total > budget:
            raise BudgetError(
                f"level {k} needs {width} nodes ({total} in total), budget is {budget}"
            )
        ranges.append((lo, hi))
        counts.append(m)
    ranges.append(symbol_range(params, depth + 1))

    spec = params.spec
    levels: list[tuple[LevelNode, ...]] = [
        (LevelNode(CFWord(), Interval.closed(Fraction(0), Fraction(1))),)
    ]
    for n in range(1, depth + 1):
        lo, hi = ranges[n - 1]
        child_lo, child_hi = ranges[n]
        level: list[LevelNode] = []
        for parent_index, parent in enumerate(levels[-1]):
            for sigma in range(lo, hi + 1):
                word = parent.digits.extend(sigma)
                level.append(LevelNode(word, _child_span(word, child_lo, child_hi), parent_index))
        level.sort(key=lambda node: node.interval.left)
        levels.append(tuple(level))
        logger.debug("build_levels(%s): level %d has %d nodes", spec.label, n, len(level))

    # ranges[k-1] is [⌈f(k)⌉, ⌊g(k)⌋] for k >= N
    for node in levels[depth]:
        for k in range(params.N, depth + 1):
            lo, hi = ranges[k - 1]
            assert lo <= node.digits[k - 1] <= hi, f"digit {k} of {node.digits} outside [f, g]"

    log_eps = tuple(gap_epsilon_log(params, n) for n in range(depth + 1))
    return LevelTree(
        params=params,
        depth=depth,
        ranges=tuple(ranges),
        levels=tuple(levels),
        counts=tuple(counts),
        log_eps=log_eps,
    )


def verify_separation(tree: LevelTree, n: int) -> bool:
    """Adjacent siblings at level n are separated by at least the exact ε_n."""
    if n == 0:
        return True
    if n > tree.depth:
        raise DomainError(f"tree has depth {tree.depth}, asked for level {n}")
    eps = gap_epsilon_exact(tree.params, n)
    siblings: dict[int | None, list[Interval]] = {}
    for node in tree.levels[n]:
        siblings.setdefault(node.parent, []).append(node.interval)
    for group in siblings.values():
        if any(gap < eps for gap in IntervalIndex(group).gaps()):
            return False
    return True


# ============================================================================
# MASS DISTRIBUTION
# ============================================================================

class MassAssignment:
    """Uniform mass on the tree pruned to exactly m_n children per node.

    A node survives when every digit σ_k is among the m_k smallest admissible
    ones; each surviving level-n node carries (m_1...m_n)^{-1}.
    """

    def __init__(self, tree: LevelTree) -> None:
        self.tree = tree
        keep_below = [lo + m for (lo, _), m in zip(tree.ranges, tree.counts)]
        self._retained: list[list[Interval]] = []
        for n, level in enumerate(tree.levels):
            kept = [
                node.interval
                for node in level
                if all(node.digits[k] < keep_below[k] for k in range(n))
            ]
            self._retained.append(kept)
        self._indexes = [IntervalIndex(kept) for kept in self._retained]
        self._eps = [gap_epsilon_exact(tree.params, n) for n in range(tree.depth + 1)]

    @property
    def depth(self) -> int:
        return self.tree.depth

    def retained(self, n: int) -> list[Interval]:
        return list(self._retained[n])

    def node_mass(self, n: int) -> Fraction:
        return Fraction(1, prod(self.tree.counts[:n]))

    def level_sum(self, n: int) -> Fraction:
        return len(self._retained[n]) * self.node_mass(n)

    def epsilon(self, n: int) -> Fraction:
        return self._eps[n]

    def level_for(self, length: Fraction) -> int:
        """Smallest n with ε_n <= length (the depth when there is none)."""
        for n, eps in enumerate(self._eps):
            if eps <= length:
                return n
        return self.depth

    def mass_meeting(self, n: int, left: Fraction, right: Fraction) -> Fraction:
        return self._indexes[n].count_meeting(left, right) * self.node_mass(n)


def natural_mass(assignment: MassAssignment, U: Interval) -> Fraction:
    """μ(U): mass of the level-n nodes meeting U, with ε_n <= |U| < ε_{n-1}.

    Raises:
        DomainError: U is not inside [0, 1].
    """
    if U.left < 0 or U.right > 1:
        raise DomainError(f"U must lie in [0, 1], got [{U.left}, {U.right}]")
    n = assignment.level_for(U.length)
    return assignment.mass_meeting(n, U.left, U.right)


def holder_check(
    assignment: MassAssignment, s: float, trials: int, rng: np.random.Generator
) -> float:
    """Largest μ(U)/|U|^s over random intervals with ε_depth <= |U| < ε_N.

    Each U is centred at a point of a uniformly chosen retained leaf, so the
    centres follow μ; lengths are log-uniform over the allowed range.
    """
    tree = assignment.tree
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if tree.depth <= tree.params.N:
        raise DomainError(f"need depth > N={tree.params.N} to sample lengths")
    leaves = assignment.retained(tree.depth)
    lo_log = math.log(assignment.epsilon(tree.depth))
    hi_log = math.log(assignment.epsilon(tree.params.N))
    best = 0.0
    for _ in range(trials):
        leaf = leaves[int(rng.integers(len(leaves)))]
        centre = leaf.left + Fraction(float(rng.random())) * leaf.length
        half = Fraction(math.exp(rng.uniform(lo_log, hi_log))) / 2
        left, right = max(centre - half, Fraction(0)), min(centre + half, Fraction(1))
        U = Interval.closed(left, right)
        ratio = float(natural_mass(assignment, U)) / float(U.length) ** s
        best = max(best, ratio)
    logger.debug("holder_check(s=%g, trials=%d) -> %g", s, trials, best)
    return best


def tree_summary(tree: LevelTree) -> dict[str, Any]:
    """Counts and gaps per level without the node lists."""
    return {
        "depth": tree.depth,
        "node_counts": [len(level) for level in tree.levels],
        "counts": list(tree.counts),
        "ranges": [list(r) for r in tree.ranges],
        "epsilon": [fraction_str(gap_epsilon_exact(tree.params, n)) for n in range(tree.depth + 1)],
    }
