"""Tests for simulation profiles."""

from __future__ import annotations

import pytest


def test_get_profile() -> None:
    """Every registered profile resolves and builds a valid config."""
    from cfextremes.core.profiles import PROFILES, get_profile

    for name in PROFILES:
        profile = get_profile(name)
        assert profile.name == name
        config = profile.to_config()
        assert config.n_digits == profile.n_digits
        assert config.precision_bits == 4 * profile.n_digits + 64


def test_galambos_profile_matches_limit_law_run() -> None:
    from cfextremes.core.profiles import get_profile

    profile = get_profile("galambos")
    assert (profile.n_digits, profile.trials) == (2000, 5000)
    assert profile.ys == (0.5, 1.0, 2.0)


def test_profile_overrides() -> None:
    """Explicit values replace profile defaults."""
    from cfextremes.core.profiles import get_profile

    config = get_profile("smoke").to_config(n_digits=10, trials=3, seed=9)
    assert (config.n_digits, config.trials, config.seed) == (10, 3, 9)


def test_unknown_profile() -> None:
    from cfextremes.core.errors import DomainError
    from cfextremes.core.profiles import get_profile

    with pytest.raises(DomainError, match="unknown profile"):
        get_profile("turbo")
