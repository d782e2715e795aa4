"""Concentration of the partial fillup level, and how alpha shifts it.

The deepest level filled to a fraction alpha concentrates on one or two
consecutive values.  Its center moves with log n / log(1/sqrt(pq)), and alpha
only enters through a sqrt(log n) correction: lowering alpha pushes the level
deeper, raising it pulls the level up.
"""

from alctrie import (
    ExperimentConfig,
    ModelParams,
    predict_level_closed_form,
    simulate_fillup,
)

P = 0.7
TRIALS = 150


def main():
    print(f"fillup-level histograms at p = {P}, alpha = 0.5 ({TRIALS} trials)")
    for exp in (12, 14, 16):
        n = 2**exp
        config = ExperimentConfig(params=ModelParams(p=P, alpha=0.5, n=n),
                                  trials=TRIALS, seed=exp)
        hist = simulate_fillup(config)
        center = predict_level_closed_form(n, 0.5, P)
        bars = "  ".join(f"{k}:{v}" for k, v in hist.counts.items())
        print(f"  n = 2^{exp}: {bars}")
        print(f"    closed-form center {center:.2f}, "
              f"top-two consecutive mass {hist.top_two_consecutive_mass:.3f}")

    print()
    n = 2**16
    print(f"alpha shift at n = 2^16 (predicted separation "
          f"{predict_level_closed_form(n, 0.25, P) - predict_level_closed_form(n, 0.75, P):.2f} levels)")
    for alpha in (0.25, 0.5, 0.75):
        config = ExperimentConfig(params=ModelParams(p=P, alpha=alpha, n=n),
                                  trials=60, seed=99)
        hist = simulate_fillup(config)
        print(f"  alpha = {alpha}: mode {hist.mode}, histogram {hist.counts}")


if __name__ == "__main__":
    main()
