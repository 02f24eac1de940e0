"""cfextremes package.

Extreme values of continued-fraction digits: exact CF arithmetic, Gauss
measure Monte Carlo for the running maximum T_n, the nested construction
inside E_φ, and the Hausdorff dimension formulas built on it.
"""

__version__ = "0.1.0"

__all__ = [
    # Subpackages
    "core",
]
