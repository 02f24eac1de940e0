"""Simulation profiles for the `simulate` subcommand.

A profile is a named set of SimConfig defaults matching one of the limit
laws under test. Profiles only fix run sizes; flags given on the command line
override them.
"""

from dataclasses import dataclass, field

from cfextremes.core.errors import DomainError
from cfextremes.core.gauss_lab import SimConfig


@dataclass
class SimProfile:
    """Defaults for one kind of Monte Carlo run.

    Attributes:
        name: Profile identifier
        n_digits: Digits expanded per trial
        trials: Number of trials
        seed: Default root seed
        ys: Points at which the Galambos law is compared
        workers: Default worker count
    """

    name: str
    n_digits: int
    trials: int
    seed: int = 42
    ys: tuple[float, ...] = field(default=(0.5, 1.0, 2.0))
    workers: int = 1

    def to_config(
        self,
        n_digits: int | None = None,
        trials: int | None = None,
        seed: int | None = None,
        precision_bits: int | None = None,
    ) -> SimConfig:
        """SimConfig from this profile with optional overrides."""
        return SimConfig(
            n_digits=self.n_digits if n_digits is None else n_digits,
            trials=self.trials if trials is None else trials,
            seed=self.seed if seed is None else seed,
            precision_bits=precision_bits,
        )


# ============================================================================
# PROFILE DEFINITIONS
# ============================================================================

SMOKE_PROFILE = SimProfile(
    name="smoke",
    n_digits=50,
    trials=200,
)

GALAMBOS_PROFILE = SimProfile(
    name="galambos",
    n_digits=2000,  # ~8k bits per point
    trials=5000,
    workers=4,
)

TRIMMED_PROFILE = SimProfile(
    name="trimmed",
    n_digits=10_000,
    trials=50,
)

DIGITS_PROFILE = SimProfile(
    name="digits",
    n_digits=1,
    trials=100_000,
)


# ============================================================================
# PROFILE REGISTRY
# ============================================================================

PROFILES = {
    "smoke": SMOKE_PROFILE,
    "galambos": GALAMBOS_PROFILE,
    "trimmed": TRIMMED_PROFILE,
    "digits": DIGITS_PROFILE,
}


def get_profile(name: str) -> SimProfile:
    """Get simulation profile by name.

    Args:
        name: Profile name (smoke, galambos, trimmed, digits)

    Returns:
        SimProfile instance

    Raises:
        DomainError: If profile name not found
    """
    try:
        return PROFILES[name]
    except KeyError:
        raise DomainError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
