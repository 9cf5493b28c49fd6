"""Command line entry point: ``bmid {simulate,converge,verify,plotdata}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .acceptance import run_acceptance
from .config import ConfigError, load_config
from .ensemble import THREADS_ENV, default_threads
from .plotdata import emit_plot_data, overlay_data, load_records
from .runner import convergence_trend, run_experiment


def _u64(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return val


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def _load(args):
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    if getattr(args, "exponents", None):
        changes["exponents"] = args.exponents
    return cfg.replace(**changes) if changes else cfg


_SHOWN = ("ks", "p_value", "mean", "oracle_mean", "mean_plus_3se", "bound", "frac_below_0.1",
          "max_abs_error", "z_increment", "l_sandwich", "reflected_order")


def _print_records(records):
    for r in records:
        s = r.stats
        bits = [f"{k}={s[k]:.4g}" for k in _SHOWN if isinstance(s.get(k), (int, float)) and not isinstance(s[k], bool)]
        n = "-" if r.n is None else r.n
        print(f"n={n:<3} {r.functional:<28} {' '.join(bits)}")


def cmd_simulate(args) -> int:
    cfg = _load(args)
    records = run_experiment(cfg, threads=args.threads, resume=not args.fresh)
    _print_records(records)
    print(f"records written to {Path(cfg.out_dir) / 'records.jsonl'}")
    return 0


def cmd_converge(args) -> int:
    cfg = _load(args)
    records = run_experiment(cfg, threads=args.threads, resume=not args.fresh)
    _print_records(records)
    report = convergence_trend(records, cfg.replicas)
    ok = True
    for f, row in report.items():
        ks = ", ".join("-" if k is None else f"{k:.4f}" for k in row["ks"])
        print(f"{f}: KS over n={row['n']}: {ks}  trend {'ok' if row['trend_ok'] else 'BROKEN'}")
        ok &= row["trend_ok"]
    return 0 if ok else 1


def cmd_verify(args) -> int:
    out = args.out if args.out is not None else "acceptance"
    seed = 42 if args.seed is None else args.seed
    results = run_acceptance(seed=seed, threads=args.threads, scale=args.scale, only=args.only, out=out)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed; records in {Path(out) / 'acceptance.jsonl'}")
    return 1 if failed else 0


def cmd_plotdata(args) -> int:
    out = Path(args.out if args.out is not None else "plots")
    written = []
    if args.records is not None:
        written += emit_plot_data(load_records(args.records), out)
    if args.overlay:
        written += overlay_data(out, seed=0 if args.seed is None else args.seed)
    if not written:
        print("nothing to do: pass --records and/or --overlay", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="64-bit seed (overrides the config)")
    common.add_argument("--threads", type=_positive, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bmid", description="Lattice and continuum simulation of BMID.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run one experiment config")
    s.add_argument("--config", required=True)
    s.add_argument("--fresh", action="store_true", help="ignore stored partial results")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("converge", parents=[common], help="sweep lattice exponents and report the KS trend")
    c.add_argument("--config", required=True)
    c.add_argument("--exponents", type=int, nargs="+", default=None)
    c.add_argument("--fresh", action="store_true")
    c.set_defaults(func=cmd_converge)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--scale", type=float, default=1.0, help="sample-size multiplier (tolerances unchanged)")
    v.add_argument("--only", type=int, nargs="+", default=None, help="criterion numbers to run")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("plotdata", parents=[common], help="emit CSV plot data")
    d.add_argument("--records", default=None, help="records.jsonl to tabulate")
    d.add_argument("--overlay", action="store_true", help="also write the reflected/BMID path overlay")
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = default_threads()
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
