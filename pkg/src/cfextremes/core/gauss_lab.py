"""Gauss measure and seeded Monte Carlo for the running maximum T_n.

Points are drawn from the Gauss measure by inverting its distribution
function log2(1 + x): x = 2^u - 1 for u uniform on (0, 1). Each trial owns a
numpy substream keyed by (seed, trial), so results do not depend on the
number of workers or the order in which trials run.

All logarithms are natural; the Gauss normalization is 1/ln 2.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import repeat
from typing import Any

import mpmath
import numpy as np
import scipy.stats

from cfextremes.core.cf_core import CFWord, expand_real, required_precision, running_stats
from cfextremes.core.errors import DomainError, PrecisionError, SimulationError
from cfextremes.core.intervals import Interval

logger = logging.getLogger(__name__)

# A run fails when more than this fraction of its trials abort.
MAX_ABORT_FRACTION = 0.001

# Tail window used by the running iterated-log diagnostics.
TAIL_WINDOW = 0.5


# ============================================================================
# GAUSS MEASURE AND SAMPLER
# ============================================================================

def gauss_measure(interval: Interval) -> float:
    """(1/ln 2) ln((1 + right)/(1 + left)) for 0 <= left < right <= 1."""
    left, right = Fraction(interval.left), Fraction(interval.right)
    if left < 0 or right > 1:
        raise DomainError(f"gauss_measure needs 0 <= left < right <= 1, got [{left}, {right}]")
    ratio = (1 + right) / (1 + left)
    with mpmath.workprec(80):
        value = mpmath.log(mpmath.mpf(ratio.numerator) / ratio.denominator) / mpmath.log(2)
    return float(value)


def gauss_from_uniform(u: Fraction | mpmath.mpf, precision_bits: int) -> mpmath.mpf:
    """Inverse distribution function: 2^u - 1."""
    with mpmath.workprec(precision_bits):
        if isinstance(u, Fraction):
            u = mpmath.mpf(u.numerator) / u.denominator
        return mpmath.power(2, u) - 1


def sample_gauss(rng: np.random.Generator, precision_bits: int) -> mpmath.mpf:
    """One Gauss-distributed point in (0, 1) carrying ``precision_bits`` bits.

    u is assembled from raw generator bytes, so it is uniform on the dyadic
    grid of step 2^-precision_bits; u = 0 is rejected and redrawn.
    """
    nbytes = (precision_bits + 7) // 8
    excess = 8 * nbytes - precision_bits
    while True:
        k = int.from_bytes(rng.bytes(nbytes), "big") >> excess
        if k:
            break
    with mpmath.workprec(precision_bits):
        u = mpmath.ldexp(mpmath.mpf(k), -precision_bits)
    return gauss_from_uniform(u, precision_bits)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent substream for one trial."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run configuration.

    Attributes:
        n_digits: Digits expanded per trial
        trials: Number of independent trials
        seed: Root seed (64-bit)
        precision_bits: Mantissa bits of each sampled point (default 4n + 64)
    """

    n_digits: int
    trials: int
    seed: int = 0
    precision_bits: int | None = None

    def __post_init__(self) -> None:
        if self.n_digits < 1:
            raise DomainError(f"n_digits must be >= 1, got {self.n_digits}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.precision_bits is None:
            object.__setattr__(self, "precision_bits", required_precision(self.n_digits))
        elif self.precision_bits < required_precision(self.n_digits):
            raise DomainError(
                f"precision_bits={self.precision_bits} below 4n + 64 = "
                f"{required_precision(self.n_digits)}"
            )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RunningDiagnostics:
    """Running statistics for the liminf/limsup laws (reported, never tested).

    Attributes:
        philipp_min: min over the tail window of T_k ln ln k / k (liminf target 1/ln 2)
        loglog_max: max over the tail window of (ln T_k - ln k)/ln ln k
        loglog_min: min over the tail window of the same ratio
    """

    philipp_min: float
    loglog_max: float
    loglog_min: float


@dataclass(frozen=True)
class ExtremeSample:
    """T_n and S_n of one trial (both 0 when the trial aborted)."""

    trial_index: int
    n: int
    T_n: int
    S_n: int
    failed: bool = False
    diagnostics: RunningDiagnostics | None = None

    def __post_init__(self) -> None:
        if not self.failed and not 1 <= self.T_n <= self.S_n <= self.n * self.T_n:
            raise DomainError(f"inconsistent sample T_n={self.T_n}, S_n={self.S_n}, n={self.n}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CdfComparison:
    """Empirical against theoretical P(T_n ln 2 / n < y)."""

    y: float
    empirical: float
    theoretical: float
    abs_diff: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# ============================================================================
# SIMULATION
# ============================================================================

def running_diagnostics(word: CFWord, tail_window: float = TAIL_WINDOW) -> RunningDiagnostics:
    """Philipp's liminf statistic and the iterated-log ratio range along a word."""
    n = len(word)
    if n < 3:
        raise DomainError(f"running diagnostics need n >= 3, got {n}")
    stats = running_stats(word)
    start = max(3, int(n * (1 - tail_window)))
    philipp = min(stats[k - 1][0] * math.log(math.log(k)) / k for k in range(start, n + 1))
    ratios = [
        (math.log(stats[k - 1][0]) - math.log(k)) / math.log(math.log(k))
        for k in range(start, n + 1)
    ]
    return RunningDiagnostics(philipp_min=philipp, loglog_max=max(ratios), loglog_min=min(ratios))


def _run_trial(config: SimConfig, trial: int) -> ExtremeSample:
    rng = trial_rng(config.seed, trial)
    x = sample_gauss(rng, config.precision_bits)
    try:
        expansion = expand_real(x, config.n_digits, config.precision_bits)
    except PrecisionError as e:
        logger.warning("trial %d aborted: %s", trial, e)
        return ExtremeSample(trial_index=trial, n=config.n_digits, T_n=0, S_n=0, failed=True)
    word = expansion.word
    T_n, S_n = running_stats(word)[-1]
    diagnostics = running_diagnostics(word) if len(word) >= 3 else None
    return ExtremeSample(
        trial_index=trial, n=config.n_digits, T_n=T_n, S_n=S_n, diagnostics=diagnostics
    )


def simulate_extremes(config: SimConfig, workers: int = 1) -> list[ExtremeSample]:
    """Run every trial and return the samples ordered by trial index.

    Raises:
        SimulationError: more than 0.1% of the trials aborted.
    """
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    trials = range(config.trials)
    if workers == 1:
        samples = [_run_trial(config, t) for t in trials]
    else:
        chunksize = max(1, config.trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_run_trial, repeat(config), trials, chunksize=chunksize))
    samples.sort(key=lambda s: s.trial_index)

    failed = sum(s.failed for s in samples)
    logger.debug("simulate_extremes: %d trials, %d aborted", config.trials, failed)
    if failed > MAX_ABORT_FRACTION * config.trials:
        raise SimulationError(f"{failed} of {config.trials} trials aborted on precision")
    return samples


# ============================================================================
# STATISTICS
# ============================================================================

def _completed(samples: Iterable[ExtremeSample]) -> list[ExtremeSample]:
    done = [s for s in samples if not s.failed]
    if not done:
        raise DomainError("no completed samples")
    return done


def galambos_cdf(y: float) -> float:
    """Limit law e^{-1/y} of T_n ln 2 / n."""
    if y <= 0:
        raise DomainError(f"y must be > 0, got {y}")
    return math.exp(-1.0 / y)


def galambos_cdf_compare(
    samples: Sequence[ExtremeSample], ys: Sequence[float]
) -> list[CdfComparison]:
    """Empirical P(T_n ln 2 / n < y) against e^{-1/y} for each y."""
    done = _completed(samples)
    ns = {s.n for s in done}
    if len(ns) != 1:
        raise DomainError(f"samples must share one n, got {sorted(ns)}")
    n = ns.pop()
    scaled = np.array([s.T_n for s in done], dtype=float) * math.log(2) / n
    out: list[CdfComparison] = []
    for y in ys:
        theoretical = galambos_cdf(y)
        empirical = float(np.mean(scaled < y))
        out.append(CdfComparison(y, empirical, theoretical, abs(empirical - theoretical)))
    return out


def trimmed_sum_stat(sample: ExtremeSample) -> float:
    """(S_n - T_n)/(n ln n); concentrates near 1/ln 2."""
    if sample.n < 2:
        raise DomainError(f"trimmed sum needs n >= 2, got {sample.n}")
    return (sample.S_n - sample.T_n) / (sample.n * math.log(sample.n))


def log_ratio_stat(sample: ExtremeSample) -> float:
    """ln T_n / ln n (informational; almost surely tends to 1)."""
    if sample.n < 3 or sample.T_n < 1:
        raise DomainError(f"log ratio needs n >= 3 and T_n >= 1, got n={sample.n}")
    return math.log(sample.T_n) / math.log(sample.n)


def summarize(samples: Sequence[ExtremeSample]) -> dict[str, Any]:
    """Medians of the per-trial statistics."""
    done = _completed(samples)
    out: dict[str, Any] = {
        "trials": len(samples),
        "failed": len(samples) - len(done),
        "trimmed_sum_median": float(np.median([trimmed_sum_stat(s) for s in done])),
        "trimmed_sum_target": 1 / math.log(2),
    }
    if done[0].n >= 3:
        out["log_ratio_median"] = float(np.median([log_ratio_stat(s) for s in done]))
    diags = [s.diagnostics for s in done if s.diagnostics is not None]
    if diags:
        out["philipp_min_median"] = float(np.median([d.philipp_min for d in diags]))
        out["loglog_max_median"] = float(np.median([d.loglog_max for d in diags]))
        out["loglog_min_median"] = float(np.median([d.loglog_min for d in diags]))
    return out


def sampler_ks_distance(values: Sequence[float]) -> float:
    """Kolmogorov-Smirnov distance of values from the Gauss distribution."""
    if len(values) == 0:
        raise DomainError("no values")
    result = scipy.stats.kstest(np.asarray(values, dtype=float), lambda x: np.log2(1 + x))
    return float(result.statistic)


def digit_frequency(words: Iterable[CFWord], digit: int = 1, position: int = 1) -> float:
    """Fraction of words whose digit at ``position`` (1-based) equals ``digit``."""
    hits = total = 0
    for word in words:
        if len(word) < position:
            continue
        total += 1
        hits += word[position - 1] == digit
    if total == 0:
        raise DomainError(f"no word reaches position {position}")
    return hits / total
