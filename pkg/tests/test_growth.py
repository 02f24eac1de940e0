from __future__ import annotations

import math
from fractions import Fraction

import pytest

from cfextremes.core.errors import BudgetError, DomainError
from cfextremes.core.growth import (
    LOG_LOG_SWITCH,
    Family,
    GrowthSpec,
    LogScalar,
    bound_f,
    bound_g,
    default_d,
    default_delta,
    exact_param,
    find_N0,
    log_log_phi,
    log_phi,
    phi_exact,
    scaled_phi_round,
    threshold_holds,
    threshold_N,
    verify_inclusion_inequalities,
)

LN2 = math.log(2.0)


def _doubly(**kw: float) -> GrowthSpec:
    params = {"b": 2.0, "c": 2.0, "alpha": 1.0, "beta": 1.0}
    params.update(kw)
    return GrowthSpec.doubly_exp(**params)


# ============================================================================
# LogScalar
# ============================================================================

def test_log_scalar_switches_representation() -> None:
    small = LogScalar.from_log(5.0)
    assert small.log_log_value is None
    big = LogScalar.from_log(2 * LOG_LOG_SWITCH)
    assert big.log_log_value == pytest.approx(math.log(2 * LOG_LOG_SWITCH))
    huge = LogScalar.from_log_log(2000.0)
    assert huge.log_value == math.inf
    assert huge.magnitude() == 2000.0
    tiny = LogScalar.from_log_log(2000.0, negative=True)
    assert tiny.negative
    assert tiny.log_value == -math.inf


def test_log_scalar_ordering_spans_both_fields() -> None:
    values = [
        LogScalar.from_log_log(2000.0, negative=True),
        LogScalar.from_log(-800.0),
        LogScalar.from_log(-1.0),
        LogScalar(0.0),
        LogScalar.from_log(3.0),
        LogScalar.from_log(900.0),
        LogScalar.from_log_log(2000.0),
    ]
    assert sorted(reversed(values)) == values
    assert LogScalar.from_log(1.0).ge(LogScalar.from_log(1.0 + 1e-14))
    assert not LogScalar.from_log(1.0).ge(LogScalar.from_log(1.1))


def test_log_scalar_arithmetic() -> None:
    x = LogScalar.from_log(2.0)
    assert x.shift(1.5).log_value == pytest.approx(3.5)
    assert x.times(LogScalar.from_log(-0.5)).log_value == pytest.approx(1.5)
    big = LogScalar.from_log_log(1000.0)
    shifted = big.shift(math.log(3.0))
    assert shifted.log_log_value == pytest.approx(1000.0, rel=1e-15)
    assert shifted.ge(big)


def test_log_scalar_times_in_log_log_domain() -> None:
    """Products of two huge quantities add their logarithms via logaddexp."""
    a = LogScalar.from_log_log(1000.0)
    assert a.times(a).log_log_value == pytest.approx(1000.0 + LN2, rel=1e-15)
    b = LogScalar.from_log_log(990.0)
    expected = 1000.0 + math.log1p(math.exp(-10.0))
    assert a.times(b).log_log_value == pytest.approx(expected, rel=1e-15)
    assert not a.times(b).negative


# ============================================================================
# GrowthSpec
# ============================================================================

def test_spec_validation() -> None:
    with pytest.raises(DomainError):
        GrowthSpec.polynomial(0.0)
    with pytest.raises(DomainError):
        GrowthSpec.single_exp(alpha=-1.0)
    with pytest.raises(DomainError):
        GrowthSpec.single_exp(alpha=1.0, base=1.0)
    with pytest.raises(DomainError):
        GrowthSpec.doubly_exp(b=1.0, c=2.0, alpha=1.0)
    with pytest.raises(DomainError):
        _doubly(beta=0.0)


def test_spec_dict_round_trip_and_replace() -> None:
    spec = _doubly(c=3.0, beta=2.0)
    assert GrowthSpec.from_dict(spec.to_dict()) == spec
    assert spec.to_dict()["family"] == "doubly"
    assert spec.replace(alpha=2.0).alpha == 2.0
    assert GrowthSpec.from_dict({"family": "polynomial", "p": 3}).power == 3.0
    with pytest.raises(DomainError):
        GrowthSpec.from_dict({"family": "triple"})


def test_exact_param_reads_decimal() -> None:
    assert exact_param(1.1) == Fraction(11, 10)
    assert exact_param(2.0) == 2


# ============================================================================
# log-domain evaluation
# ============================================================================

def test_log_phi_examples() -> None:
    assert log_phi(_doubly(), 3).log_value == pytest.approx(8 * LN2, rel=1e-12)
    assert log_phi(GrowthSpec.single_exp(alpha=1.0), 3).log_value == pytest.approx(3.0, rel=1e-12)
    assert log_phi(GrowthSpec.polynomial(3.0), 10).log_value == pytest.approx(
        3 * math.log(10), rel=1e-12
    )


def test_log_phi_overflows_into_log_log() -> None:
    L = log_phi(_doubly(alpha=2.0), 40)
    assert L.log_value == math.inf
    assert L.log_log_value == pytest.approx(1600 * LN2 + math.log(LN2), rel=1e-12)


def test_log_log_matches_plain_log_across_switch() -> None:
    spec = _doubly()
    for n in range(1, 12):
        direct = 2.0**n * LN2
        assert log_log_phi(spec, n) == pytest.approx(math.log(direct), rel=1e-12)
        if math.isfinite(log_phi(spec, n).log_value):
            assert log_phi(spec, n).log_value == pytest.approx(direct, rel=1e-9)


def test_log_phi_strictly_increasing() -> None:
    for spec in (_doubly(), _doubly(alpha=0.5), GrowthSpec.single_exp(alpha=0.3)):
        values = [log_phi(spec, n) for n in range(1, 200)]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_bounds_f_and_g() -> None:
    spec = _doubly()
    assert bound_f(spec, 2).value() == pytest.approx(8.0, rel=1e-12)
    assert bound_g(spec, 2).value() == pytest.approx(24.0, rel=1e-12)
    assert bound_f(spec, 1) is None
    for n in range(2, 13):
        diff = bound_g(spec, n).log_value - bound_f(spec, n).log_value
        if math.isfinite(diff):
            assert diff == pytest.approx(math.log((1 + 1 / n) / (1 - 1 / n)), rel=1e-9)


# ============================================================================
# threshold N
# ============================================================================

def test_threshold_examples() -> None:
    assert threshold_N(_doubly()) == 2
    assert threshold_N(_doubly(beta=10.0)) == 1
    assert threshold_N(GrowthSpec.single_exp(alpha=1.0, base=2.0)) == 2
    with pytest.raises(DomainError):
        threshold_N(GrowthSpec.polynomial(2.0))


def test_threshold_is_least_index() -> None:
    spec = GrowthSpec.doubly_exp(b=1.1, c=1.1, alpha=0.5)
    N = threshold_N(spec)
    assert all(threshold_holds(spec, n) for n in range(N, N + 50))
    assert not threshold_holds(spec, N - 1)


def test_threshold_far_beyond_scan_range() -> None:
    """φ(n) = e^{n^0.1}: φ(n)/n >= 2 only resumes near n = e^36."""
    spec = GrowthSpec.single_exp(alpha=0.1)
    N = threshold_N(spec)
    assert 10**15 < N < 10**16
    assert threshold_holds(spec, N)
    assert not threshold_holds(spec, N - 1)
    assert threshold_holds(spec, 2 * N)
    # L(n) - ln n is smallest at n = 10^10, where the ratio condition fails
    assert not threshold_holds(spec, 10**10)


# ============================================================================
# inclusion inequalities
# ============================================================================

def test_default_inclusion_parameters() -> None:
    spec = _doubly()
    assert default_delta(spec) == pytest.approx(1 / 6)
    assert default_d(spec) == 1.5


def test_find_N0_examples() -> None:
    spec = _doubly()
    assert find_N0(spec, d=1.5, delta=0.25, horizon=100) == 1
    assert find_N0(spec, d=1.9, delta=0.25, horizon=100) == 2
    assert verify_inclusion_inequalities(spec, d=1.5, delta=0.25, N0=1, n_max=100)
    assert verify_inclusion_inequalities(spec, d=1.9, delta=0.25, N0=2, n_max=100)
    assert not verify_inclusion_inequalities(spec, d=1.9, delta=0.25, N0=1, n_max=100)


def test_inclusion_preconditions() -> None:
    spec = _doubly()
    with pytest.raises(DomainError):
        find_N0(spec, d=1.5, delta=0.5, horizon=10)
    with pytest.raises(DomainError):
        find_N0(spec, d=2.0, delta=0.1, horizon=10)
    with pytest.raises(DomainError):
        find_N0(GrowthSpec.single_exp(alpha=1.0), d=1.5, delta=0.1, horizon=10)
    assert verify_inclusion_inequalities(spec, d=1.9, delta=0.25, N0=5, n_max=4)


def test_find_N0_monotone_in_delta() -> None:
    spec = _doubly()
    found = [find_N0(spec, d=1.9, delta=delta, horizon=200) for delta in (0.3, 0.2, 0.1, 0.05)]
    assert None not in found
    assert all(a >= b for a, b in zip(found, found[1:]))


@pytest.mark.parametrize("b", [2.0, 3.0])
@pytest.mark.parametrize("c", [2.0, 5.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0])
@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_inclusion_holds_on_grid(b: float, c: float, alpha: float, beta: float) -> None:
    spec = GrowthSpec.doubly_exp(b=b, c=c, alpha=alpha, beta=beta)
    d, delta = default_d(spec), default_delta(spec)
    N0 = find_N0(spec, d, delta, horizon=500)
    assert N0 is not None
    assert verify_inclusion_inequalities(spec, d, delta, N0, 500)


# ============================================================================
# exact φ
# ============================================================================

def test_phi_exact() -> None:
    assert phi_exact(_doubly(), 3) == 256
    assert phi_exact(GrowthSpec.single_exp(alpha=1.0, base=2.0), 5) == 32
    assert phi_exact(GrowthSpec.single_exp(alpha=1.0), 5) is None
    assert phi_exact(_doubly(alpha=0.5), 4) is None
    with pytest.raises(BudgetError):
        phi_exact(_doubly(), 20)


def test_scaled_phi_round() -> None:
    spec = _doubly()
    assert scaled_phi_round(spec, 3, Fraction(2, 3), ceil=True) == 171
    assert scaled_phi_round(spec, 3, Fraction(4, 3)) == 341
    # e^3 = 20.0855...
    spec_e = GrowthSpec.single_exp(alpha=1.0)
    assert scaled_phi_round(spec_e, 3, Fraction(1)) == 20
    assert scaled_phi_round(spec_e, 3, Fraction(1), ceil=True) == 21
    assert GrowthSpec.single_exp(alpha=1.0).family is Family.SINGLE_EXP
