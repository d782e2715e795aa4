"""Exact level-occupancy expectations versus simulation.

The expected fraction of filled nodes at level k has a closed sum under both
the fixed-n and the Poisson model.  This script prints both curves for a
biased source and checks them against a Monte Carlo run.
"""

from alctrie import (
    ExperimentConfig,
    ModelParams,
    estimate_fill_fractions,
    expected_fill_fraction,
)

N = 4096
P = 0.7
TRIALS = 400
LEVELS = list(range(0, 22, 2))


def main():
    fixed = ModelParams(p=P, alpha=0.5, n=N)
    poisson = ModelParams(p=P, alpha=0.5, lam=float(N))
    config = ExperimentConfig(params=fixed, trials=TRIALS, seed=2024)
    estimates = estimate_fill_fractions(config, LEVELS)

    print(f"expected fill fraction, n = {N}, p = {P}, {TRIALS} trials")
    print(f"{'k':>3} {'fixed-n':>12} {'poisson':>12} {'simulated':>12} {'diff':>10}")
    for k in LEVELS:
        exact = expected_fill_fraction(fixed, k)
        pois = expected_fill_fraction(poisson, k)
        sim = estimates[k].mean
        print(f"{k:>3} {exact:>12.6f} {pois:>12.6f} {sim:>12.6f} "
              f"{sim - exact:>10.2e}")
    print()
    print("the two models agree to a few in the third decimal at this size,")
    print("and the simulation tracks the fixed-n curve within Monte Carlo noise.")


if __name__ == "__main__":
    main()
