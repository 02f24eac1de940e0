"""Demo: no normalizing sequence makes T_n/b_n settle at a positive constant.

For almost every x the largest partial quotient T_n satisfies
limsup T_n/b_n = 0 or +inf according to whether sum 1/b_n converges or
diverges. This script follows a few Gauss-random points and prints the
maximum of T_k/b_k over the window n/2 < k <= n at checkpoints for

    b_n = n ln n        (sum 1/b_n diverges: large ratios keep recurring)
    b_n = n ln^2 n      (sum 1/b_n converges: the ratios drift toward 0)

Nothing here is a test; at finite n the two regimes only separate slowly.

Usage:
    python demo_normalizing_dichotomy.py [n_digits] [points]
"""

import math
import sys

from cfextremes.core.cf_core import expand_real, required_precision, running_stats
from cfextremes.core.gauss_lab import sample_gauss, trial_rng

SEED = 2024
CHECKPOINTS = (100, 1_000, 5_000, 10_000, 20_000)

NORMALIZERS = {
    "n ln n": lambda n: n * math.log(n),
    "n ln^2 n": lambda n: n * math.log(n) ** 2,
}


def window_ratio_max(maxima: list[int], b) -> dict[int, float]:
    """max of T_k/b_k over n/2 < k <= n at each checkpoint n."""
    out: dict[int, float] = {}
    for n in CHECKPOINTS:
        if n > len(maxima):
            break
        out[n] = max(maxima[k - 1] / b(k) for k in range(n // 2 + 1, n + 1))
    return out


def main() -> None:
    n_digits = int(sys.argv[1]) if len(sys.argv) > 1 else CHECKPOINTS[-1]
    points = int(sys.argv[2]) if len(sys.argv) > 2 else 3
    bits = required_precision(n_digits)

    print("=" * 70)
    print(f"T_n / b_n along {points} Gauss-random points, n up to {n_digits}")
    print("=" * 70)
    for trial in range(points):
        x = sample_gauss(trial_rng(SEED, trial), bits)
        word = expand_real(x, n_digits, bits).word
        maxima = [t for t, _ in running_stats(word)]
        print(f"\npoint {trial}: T_n = {maxima[-1]}")
        for label, b in NORMALIZERS.items():
            ratios = window_ratio_max(maxima, b)
            row = "  ".join(f"n={n}: {r:8.4f}" for n, r in ratios.items())
            print(f"  b_n = {label:<9} {row}")

    print("\nWindow maxima over (n/2, n]: under n ln n they recur at large values")
    print("infinitely often; under n ln^2 n they tend to 0.")


if __name__ == "__main__":
    main()
