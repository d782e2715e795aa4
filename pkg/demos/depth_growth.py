"""Search depth in partially compressed tries grows like log log n.

Each compressed node cuts the number of candidate keys from m to roughly
m**(1 - entropy/mean_self_info), so the path length grows doubly
logarithmically.  At desk scales the additive terms still dominate the
asymptotic coefficient, which is why the ratio diagnostics below compare
growth shapes instead of the constant itself.
"""

import math

from alctrie import (
    DepthSample,
    ExperimentConfig,
    ModelParams,
    compress,
    depth,
    depth_constant,
    generate_keys,
    SourceParams,
    simulate_depth,
    source_constants,
)

P = 0.7
ALPHA = 0.5


def main():
    c = source_constants(P)
    print(f"source p = {P}: entropy {c.entropy:.4f}, "
          f"mean self-information {c.mean_self_info:.4f}, "
          f"shrink exponent {c.shrink_exponent:.4f}")
    print(f"asymptotic depth coefficients: partial compression "
          f"{depth_constant(P, 'alpha_lc'):.4f}, "
          f"full compression {depth_constant(P, 'full_lc'):.4f}")
    print()

    print(f"{'n':>8} {'mean D':>8} {'D/log2 n':>9} {'D/loglog n':>11}")
    for exp in (8, 12, 16):
        n = 2**exp
        config = ExperimentConfig(params=ModelParams(p=P, alpha=ALPHA, n=n),
                                  trials=120, seed=exp * 7)
        s = simulate_depth(config)
        print(f"{n:>8} {s.mean:>8.3f} {s.mean / exp:>9.4f} "
              f"{s.loglog_ratio:>11.4f}")
    print("depth grows, but much slower than log n: the per-log ratio falls.")
    print()

    # one instance in detail: the first key's path through the compressed trie
    keys = generate_keys(SourceParams(P, 5), 4096)
    alc = compress(keys, ALPHA)
    sample: DepthSample = depth(alc, 0)
    print(f"one instance at n = 4096: key 0 sits {sample.depth} compressed "
          f"nodes deep, consuming {sample.consumed_total} trie levels "
          f"(uncompressed trie would need about "
          f"{math.log2(4096) / c.entropy:.1f}).")


if __name__ == "__main__":
    main()
