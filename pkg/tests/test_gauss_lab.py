from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from cfextremes.core.cf_core import CFWord, cylinder_interval, expand_real, required_precision
from cfextremes.core.errors import DomainError
from cfextremes.core.gauss_lab import (
    ExtremeSample,
    SimConfig,
    digit_frequency,
    galambos_cdf,
    galambos_cdf_compare,
    gauss_from_uniform,
    gauss_measure,
    log_ratio_stat,
    running_diagnostics,
    sample_gauss,
    sampler_ks_distance,
    simulate_extremes,
    summarize,
    trial_rng,
    trimmed_sum_stat,
)
from cfextremes.core.intervals import Interval

F = Fraction


# ============================================================================
# Gauss measure and sampler
# ============================================================================

def test_gauss_measure_examples() -> None:
    assert gauss_measure(Interval.open(F(0), F(1))) == pytest.approx(1.0, abs=1e-15)
    assert gauss_measure(Interval.open(F(0), F(1, 2))) == pytest.approx(0.584963, abs=1e-6)
    first, _ = cylinder_interval(CFWord((1,)))
    assert gauss_measure(first) == pytest.approx(0.415037, abs=1e-6)
    cyl, _ = cylinder_interval(CFWord((1, 2, 2)))
    expected = math.log((12 / 7) / (17 / 10)) / math.log(2)
    assert gauss_measure(cyl) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        gauss_measure(Interval.open(F(1, 2), F(3, 2)))


def test_gauss_measure_is_additive_over_children() -> None:
    parent, _ = cylinder_interval(CFWord((2,)))
    children = [cylinder_interval(CFWord((2, j)))[0] for j in range(1, 200)]
    assert min(c.left for c in children) == parent.left
    tail = Interval.open(max(c.right for c in children), parent.right)
    total = sum(gauss_measure(c) for c in children) + gauss_measure(tail)
    assert total == pytest.approx(gauss_measure(parent), rel=1e-9)


def test_inverse_cdf() -> None:
    assert float(gauss_from_uniform(F(1, 2), 64)) == pytest.approx(math.sqrt(2) - 1, rel=1e-15)


def test_sampler_is_deterministic() -> None:
    a = [sample_gauss(trial_rng(7, t), 96) for t in range(20)]
    b = [sample_gauss(trial_rng(7, t), 96) for t in range(20)]
    assert a == b
    assert all(0 < x < 1 for x in a)
    assert len(set(a)) == 20


# ============================================================================
# simulation
# ============================================================================

def test_sim_config_validation() -> None:
    assert SimConfig(n_digits=10, trials=1).precision_bits == required_precision(10)
    with pytest.raises(DomainError):
        SimConfig(n_digits=10, trials=1, precision_bits=100)
    with pytest.raises(DomainError):
        SimConfig(n_digits=10, trials=0)
    with pytest.raises(DomainError):
        SimConfig(n_digits=10, trials=1, seed=2**64)


def test_simulation_is_reproducible() -> None:
    config = SimConfig(n_digits=10, trials=1, seed=42)
    first = simulate_extremes(config)
    assert first == simulate_extremes(config)
    sample = first[0]
    assert not sample.failed
    assert 1 <= sample.T_n <= sample.S_n <= 10 * sample.T_n


def test_worker_count_does_not_change_results() -> None:
    config = SimConfig(n_digits=30, trials=12, seed=3)
    assert simulate_extremes(config, workers=1) == simulate_extremes(config, workers=2)


def test_sample_matches_direct_expansion() -> None:
    config = SimConfig(n_digits=25, trials=3, seed=11)
    for sample in simulate_extremes(config):
        x = sample_gauss(trial_rng(11, sample.trial_index), config.precision_bits)
        word = expand_real(x, 25, config.precision_bits).word
        assert sample.T_n == max(word)
        assert sample.S_n == sum(word)


def test_extreme_sample_invariant() -> None:
    with pytest.raises(DomainError):
        ExtremeSample(trial_index=0, n=3, T_n=5, S_n=4)
    ExtremeSample(trial_index=0, n=3, T_n=0, S_n=0, failed=True)


# ============================================================================
# statistics
# ============================================================================

def _synthetic(n: int, maxima: list[int]) -> list[ExtremeSample]:
    return [ExtremeSample(i, n, t, t + n - 1) for i, t in enumerate(maxima)]


def test_galambos_comparison_on_synthetic_samples() -> None:
    samples = _synthetic(100, [10, 100, 200, 300])
    rows = galambos_cdf_compare(samples, [1.0, 2.0])
    assert rows[0].empirical == 0.5
    assert rows[0].theoretical == pytest.approx(0.367879, abs=1e-6)
    assert rows[1].theoretical == pytest.approx(0.606531, abs=1e-6)
    assert rows[1].abs_diff == pytest.approx(abs(rows[1].empirical - rows[1].theoretical))
    with pytest.raises(DomainError):
        galambos_cdf_compare([], [1.0])
    with pytest.raises(DomainError):
        galambos_cdf_compare(samples + _synthetic(50, [7]), [1.0])
    with pytest.raises(DomainError):
        galambos_cdf(0.0)


def test_trimmed_and_log_ratio_stats() -> None:
    n, k = 100, 7
    flat = ExtremeSample(0, n, k, n * k)
    assert trimmed_sum_stat(flat) == pytest.approx((n - 1) * k / (n * math.log(n)))
    assert log_ratio_stat(ExtremeSample(0, n, n, n + 10)) == pytest.approx(1.0)
    assert log_ratio_stat(ExtremeSample(0, n, n * n, n * n + 5)) == pytest.approx(2.0)
    summary = summarize([flat, ExtremeSample(1, n, 0, 0, failed=True)])
    assert summary["failed"] == 1
    assert summary["trimmed_sum_target"] == pytest.approx(1 / math.log(2))


def test_running_diagnostics() -> None:
    diag = running_diagnostics(CFWord((1, 3, 1, 1, 9, 2, 1, 1)))
    assert diag.loglog_min <= diag.loglog_max
    # tail window is k = 4..8; the smaller k = 3 value is ignored
    assert diag.philipp_min == pytest.approx(3 * math.log(math.log(4)) / 4)
    assert diag.philipp_min > math.log(math.log(3))
    with pytest.raises(DomainError):
        running_diagnostics(CFWord((1, 2)))


def test_digit_frequency_counts_position() -> None:
    words = [CFWord((1, 2)), CFWord((2, 1)), CFWord((1,))]
    assert digit_frequency(words) == pytest.approx(2 / 3)
    assert digit_frequency(words, digit=1, position=2) == 0.5
    with pytest.raises(DomainError):
        digit_frequency(words, position=3)


def _gauss_points(count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    return [sample_gauss(rng, 68) for _ in range(count)]


def test_sampler_follows_gauss_law() -> None:
    points = _gauss_points(4_000, 0)
    assert sampler_ks_distance([float(x) for x in points]) < 0.05
    words = [expand_real(x, 1, 68).word for x in points]
    assert digit_frequency(words) == pytest.approx(0.415037, abs=0.03)


# ============================================================================
# slow Monte Carlo checks
# ============================================================================

@pytest.mark.slow
def test_sampler_ks_large() -> None:
    points = _gauss_points(100_000, 1)
    assert sampler_ks_distance([float(x) for x in points]) < 0.01
    words = [expand_real(x, 1, 68).word for x in points]
    assert digit_frequency(words) == pytest.approx(0.415037, abs=0.01)


@pytest.mark.slow
def test_galambos_limit_law() -> None:
    samples = simulate_extremes(SimConfig(n_digits=2000, trials=5000, seed=42), workers=4)
    for row in galambos_cdf_compare(samples, [0.5, 1.0, 2.0]):
        assert row.abs_diff < 0.03


@pytest.mark.slow
def test_trimmed_sum_concentrates() -> None:
    samples = simulate_extremes(SimConfig(n_digits=10_000, trials=50, seed=42))
    median = float(np.median([trimmed_sum_stat(s) for s in samples if not s.failed]))
    assert abs(median - 1 / math.log(2)) < 0.2 / math.log(2)
