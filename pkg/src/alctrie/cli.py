"""Command-line frontend: predictors, expectation tables, simulations, and
building/querying compressed tries over key files.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success, 2 usage
error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import (
    ModelParams,
    depth_constant,
    expected_fill_fraction,
    predict_level_calibrated,
    predict_level_closed_form,
)
from .lctrie import compress, longest_prefix_match, match_length, structure_stats
from .montecarlo import (
    ExperimentConfig,
    depth_csv,
    fillup_csv,
    simulate_depth,
    simulate_fillup,
)
from .source import KeyFileError, load_keys, parse_key_line


def _parse_range(text: str) -> list[int]:
    """Inclusive integer range "a..b", or a single integer."""
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal: {text!r}") from None
    return value


def _add_model_flags(sub, *, need_alpha: bool, fixed_only: bool = False):
    sub.add_argument("--p", type=_probability, required=True,
                     help="probability of a 1 bit, strictly between 0 and 1")
    sub.add_argument("--n", type=int, help="fixed number of keys")
    if not fixed_only:
        sub.add_argument("--lambda", dest="lam", type=float,
                         help="Poisson mean number of keys")
    if need_alpha:
        sub.add_argument("--alpha", type=_probability, required=True,
                         help="target fill fraction in (0, 1)")


def _add_sim_flags(sub):
    sub.add_argument("--trials", type=int, default=200,
                     help="number of Monte Carlo trials (default 200)")
    sub.add_argument("--seed", type=int, default=0,
                     help="master seed; fully determines all output")
    sub.add_argument("--jobs", type=int, default=None,
                     help="worker processes (default: all cores); "
                          "results are identical for any value")


def _add_format_flag(sub):
    sub.add_argument("--format", choices=("csv", "json"), default="csv",
                     help="output encoding (values are identical)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alctrie",
        description="Partial-fillup level-compressed tries: predictors, "
                    "expectation tables, simulations, and prefix matching.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("predict",
                         help="closed-form and calibrated fillup levels plus "
                              "depth growth constants")
    _add_model_flags(sp, need_alpha=True)
    _add_format_flag(sp)

    sp = subs.add_parser("expect",
                         help="expected fill fraction over a range of levels")
    _add_model_flags(sp, need_alpha=False)
    sp.add_argument("--k", type=_parse_range, required=True,
                    help="level range a..b (inclusive) or a single level")
    sp.add_argument("--alpha", type=_probability, default=0.5,
                    help="fraction recorded in the output rows (no effect on "
                         "the expectation itself)")
    _add_format_flag(sp)

    sp = subs.add_parser("sim-fillup",
                         help="simulate the alpha-fillup level distribution")
    _add_model_flags(sp, need_alpha=True)
    _add_sim_flags(sp)
    _add_format_flag(sp)

    sp = subs.add_parser("sim-depth",
                         help="simulate the compressed search depth of key 0")
    _add_model_flags(sp, need_alpha=True, fixed_only=True)
    _add_sim_flags(sp)
    _add_format_flag(sp)

    sp = subs.add_parser("build",
                         help="compress a key file and report structure stats")
    sp.add_argument("--keys", required=True, help="key file (0/1 lines or CIDR)")
    sp.add_argument("--alpha", type=_probability, required=True,
                    help="target fill fraction in (0, 1]")
    _add_format_flag(sp)

    sp = subs.add_parser("query",
                         help="longest prefix match of each query against a "
                              "compressed key file")
    sp.add_argument("--keys", required=True, help="key file (0/1 lines or CIDR)")
    sp.add_argument("--queries", required=True,
                    help="query file, same formats as the key file")
    sp.add_argument("--alpha", type=_probability, default=1.0,
                    help="compression fraction (default 1.0)")
    _add_format_flag(sp)
    return parser


def _model_params(args, *, alpha=None) -> ModelParams:
    n = getattr(args, "n", None)
    lam = getattr(args, "lam", None)
    if (n is None) == (lam is None):
        raise SystemExit(_usage_error("exactly one of --n and --lambda is required"))
    return ModelParams(p=args.p, alpha=alpha if alpha is not None else args.alpha,
                       n=n, lam=lam)


def _usage_error(message: str) -> int:
    print(f"usage error: {message}", file=sys.stderr)
    return 2


def _emit_table(header, rows, fmt, out):
    if fmt == "json":
        payload = {"columns": list(header), "rows": [list(r) for r in rows]}
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join("" if v is None else
                           (repr(v) if isinstance(v, float) else str(v))
                           for v in row) + "\n")


def _cmd_predict(args, out):
    params = _model_params(args)
    size = params.size
    closed = predict_level_closed_form(size, params.alpha, params.p)
    calibrated = predict_level_calibrated(params)
    model = "poisson" if params.is_poisson else "fixed_n"
    rows = [
        ("closed_form", size, params.p, params.alpha, None, closed),
        ("calibrated", size, params.p, params.alpha, calibrated, float(calibrated)),
    ]
    if params.p != 0.5:
        rows.append(("depth_alpha_lc", size, params.p, params.alpha, None,
                     depth_constant(params.p, "alpha_lc")))
        rows.append(("depth_full_lc", size, params.p, params.alpha, None,
                     depth_constant(params.p, "full_lc")))
    rows = [(f"{model}:{name}",) + tuple(rest) for name, *rest in rows]
    _emit_table(("model", "n_or_lambda", "p", "alpha", "k", "value"), rows,
                args.format, out)
    return 0


def _cmd_expect(args, out):
    params = _model_params(args, alpha=args.alpha)
    model = "poisson" if params.is_poisson else "fixed_n"
    rows = [
        (model, params.size, params.p, params.alpha, k,
         expected_fill_fraction(params, k))
        for k in args.k
    ]
    _emit_table(("model", "n_or_lambda", "p", "alpha", "k", "value"), rows,
                args.format, out)
    return 0


def _cmd_sim_fillup(args, out):
    params = _model_params(args)
    config = ExperimentConfig(params=params, trials=args.trials, seed=args.seed,
                              jobs=args.jobs)
    hist = simulate_fillup(config)
    if args.format == "json":
        payload = {
            "config": {
                "model": "poisson" if params.is_poisson else "fixed_n",
                "n_or_lambda": params.size, "p": params.p, "alpha": params.alpha,
                "trials": args.trials, "seed": args.seed,
            },
            "histogram": {str(k): v for k, v in hist.counts.items()},
            "undefined_trials": hist.undefined,
            "top_two_consecutive_mass": hist.top_two_consecutive_mass,
            "rows": [list(r) for r in hist.rows],
        }
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        out.write(fillup_csv(hist))
    print(f"defined trials: {hist.defined}/{hist.trials}; "
          f"top-two consecutive mass: {hist.top_two_consecutive_mass:.4f}",
          file=sys.stderr)
    return 0


def _cmd_sim_depth(args, out):
    params = ModelParams(p=args.p, alpha=args.alpha, n=args.n)
    config = ExperimentConfig(params=params, trials=args.trials, seed=args.seed,
                              jobs=args.jobs)
    summary = simulate_depth(config)
    if args.format == "json":
        payload = {
            "config": {"n": args.n, "p": args.p, "alpha": args.alpha,
                       "trials": args.trials, "seed": args.seed},
            "mean": summary.mean,
            "variance": summary.variance,
            "quantiles": {str(q): v for q, v in summary.quantiles.items()},
            "mean_over_loglog_n": summary.loglog_ratio,
            "rows": [list(r) for r in summary.rows],
        }
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        out.write(depth_csv(summary))
    print(f"mean depth {summary.mean:.3f} over {summary.trials} trials",
          file=sys.stderr)
    return 0


def _cmd_build(args, out):
    keys = load_keys(args.keys)
    trie = compress(keys, args.alpha)
    stats = structure_stats(trie)
    if args.format == "json":
        payload = {
            "keys": len(keys),
            "alpha": args.alpha,
            "node_count": stats.node_count,
            "empty_slot_fraction": stats.empty_slot_fraction,
            "consumed_histogram": {str(k): v
                                   for k, v in stats.consumed_histogram.items()},
            "max_depth": stats.max_depth,
        }
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        rows = [("keys", len(keys)), ("alpha", args.alpha),
                ("node_count", stats.node_count),
                ("empty_slot_fraction", stats.empty_slot_fraction),
                ("max_depth", stats.max_depth)]
        rows.extend((f"consumed_{c}", v)
                    for c, v in stats.consumed_histogram.items())
        _emit_table(("metric", "value"), rows, "csv", out)
    return 0


def _cmd_query(args, out):
    keys = load_keys(args.keys)
    trie = compress(keys, args.alpha)
    answers = []
    with open(args.queries, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            bits = parse_key_line(line, line_no)
            kid = longest_prefix_match(trie, bits)
            if kid is None:
                answers.append(None)
            else:
                answers.append((kid, match_length(trie, bits, kid)))
    if args.format == "json":
        payload = [None if a is None else {"key_id": a[0], "match_length": a[1]}
                   for a in answers]
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        for a in answers:
            out.write("none\n" if a is None else f"{a[0]},{a[1]}\n")
    return 0


_COMMANDS = {
    "predict": _cmd_predict,
    "expect": _cmd_expect,
    "sim-fillup": _cmd_sim_fillup,
    "sim-depth": _cmd_sim_depth,
    "build": _cmd_build,
    "query": _cmd_query,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except SystemExit:
        raise
    except KeyFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
