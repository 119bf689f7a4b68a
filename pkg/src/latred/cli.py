"""Command-line front end for the BER / timing benchmark."""

import argparse
import csv
import io
import json
import os
import sys
from collections import OrderedDict

from .simulation import ALGORITHMS, ExperimentConfig, run_experiment

__all__ = ["main", "parse_args", "parse_grid", "emit_results", "summarize_timing"]

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "algorithm",
    "ebn0_db",
    "bits_total",
    "bit_errors",
    "ber",
    "permutations_total",
    "reduce_time_s",
)
SEED_ENV = "LATRED_SEED"

EXIT_USAGE = 2
EXIT_UNWRITABLE = 3


def parse_grid(text: str) -> list:
    """Parse ``start:step:stop`` (inclusive) or a comma-separated list of dB values."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, step, stop = parts
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            grid = [start + i * step for i in range(count)]
            grid = [g for g in grid if g <= stop + 1e-9 * abs(step)]
        else:
            grid = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid grid {text!r}; use start:step:stop or a comma-separated list"
        ) from None
    if not grid:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return [round(g, 12) for g in grid]


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _delta(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.25 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (1/4, 1], got {v}")
    return v


def _ratio(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {v}")
    return v


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return v


def _algorithms(text):
    names = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in names if a not in ALGORITHMS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm(s) {bad}; choose from {','.join(ALGORITHMS)}"
        )
    if len(set(names)) != len(names):
        raise argparse.ArgumentTypeError("duplicate algorithm names")
    return names


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    p = argparse.ArgumentParser(
        prog="latred",
        description="Monte-Carlo BER comparison of LLL-aided Babai detectors "
        "(LLL, fcLLL, EfcLLL, GfcLLL(1), GfcLLL(2)) on Rayleigh MIMO channels.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--n", type=_positive_int, default=d.n_complex,
                   help="complex dimension of the square channel")
    p.add_argument("--qam", type=int, choices=(4, 16), default=d.qam, help="QAM order")
    p.add_argument("--ebn0", type=parse_grid, default="2:2:30",
                   help="Eb/N0 grid in dB, start:step:stop or comma list")
    p.add_argument("--channels", type=_positive_int, default=d.channels,
                   help="number of channel matrices")
    p.add_argument("--vectors", type=_positive_int, default=d.vectors_per_channel,
                   help="signal/noise draws per channel")
    p.add_argument("--algorithms", type=_algorithms, default=",".join(ALGORITHMS),
                   help="comma-separated subset of " + ",".join(ALGORITHMS))
    p.add_argument("--J", type=_positive_int, default=d.J,
                   help="sweeps for fcLLL/EfcLLL")
    p.add_argument("--budget-ratio", type=_ratio, default=d.budget_ratio,
                   help="GfcLLL permutation budget as a fraction of EfcLLL's count K")
    p.add_argument("--delta", type=_delta, default=d.delta, help="Lovasz parameter")
    p.add_argument("--seed", type=_seed, default=d.seed,
                   help=f"master seed (overridden by ${SEED_ENV})")
    p.add_argument("--output", default=d.output_path, help="output file")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: from the --output suffix, else csv)")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes; results do not depend on this")
    p.add_argument("--no-timing", action="store_true",
                   help="write 0 for reduction times so output files are byte-reproducible")
    p.add_argument("--dry-run", action="store_true",
                   help="print the resolved configuration and exit")
    return p


def parse_args(argv=None, environ=None):
    """Parse argv into ``(ExperimentConfig, options)``; usage errors exit with code 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    environ = os.environ if environ is None else environ
    seed = args.seed
    if environ.get(SEED_ENV):
        try:
            seed = _seed(environ[SEED_ENV])
        except argparse.ArgumentTypeError as exc:
            parser.error(f"${SEED_ENV}: {exc}")
    fmt = args.format
    if fmt is None:
        fmt = "json" if args.output.lower().endswith(".json") else "csv"
    try:
        config = _make_config(args, seed, fmt)
    except ValueError as exc:
        parser.error(str(exc))
    return config, args


def _make_config(args, seed, fmt):
    return ExperimentConfig(
        n_complex=args.n,
        qam=args.qam,
        ebn0_grid=args.ebn0,
        channels=args.channels,
        vectors_per_channel=args.vectors,
        algorithms=args.algorithms,
        J=args.J,
        budget_ratio=args.budget_ratio,
        delta=args.delta,
        seed=seed,
        output_path=args.output,
        format=fmt,
    )


def summarize_timing(records) -> list:
    """Total reduction time per algorithm, in first-seen order.

    Accepts any records with ``algorithm`` and ``reduce_time`` attributes;
    pass per-channel records to get the time for reducing every channel once.
    """
    totals = OrderedDict()
    for r in records:
        totals[r.algorithm] = totals.get(r.algorithm, 0.0) + r.reduce_time
    return [(name, t) for name, t in totals.items()]


def _record_row(r):
    return {
        "algorithm": r.algorithm,
        "ebn0_db": f"{r.ebn0_db:g}",
        "bits_total": str(r.bits_total),
        "bit_errors": str(r.bit_errors),
        "ber": f"{r.ber:.10g}",
        "permutations_total": str(r.permutations),
        "reduce_time_s": f"{r.reduce_time:.6f}",
    }


def render_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(_record_row(r))
    return buf.getvalue()


def render_json(records, config, channels=()) -> str:
    rows = []
    for r in records:
        rows.append(
            {
                "algorithm": r.algorithm,
                "ebn0_db": r.ebn0_db,
                "bits_total": r.bits_total,
                "bit_errors": r.bit_errors,
                "ber": float(f"{r.ber:.10g}"),
                "permutations_total": r.permutations,
                "reduce_time_s": round(r.reduce_time, 6),
            }
        )
    timing_src = channels if channels else records
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "records": rows,
        "timing": [
            {"algorithm": a, "total_reduce_time_s": round(t, 6)}
            for a, t in summarize_timing(timing_src)
        ],
        "channels": [
            {
                "channel": c.channel,
                "algorithm": c.algorithm,
                "K": c.K,
                "budget": c.budget,
                "permutations": c.permutations,
                "reduce_time_s": round(c.reduce_time, 6),
            }
            for c in channels
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def emit_results(records, config, path=None, fmt=None, channels=()) -> None:
    """Write records as CSV or JSON. Raises OSError if the path is unwritable."""
    if not records:
        raise ValueError("no records to write")
    path = config.output_path if path is None else path
    fmt = config.format if fmt is None else fmt
    if fmt == "csv":
        text = render_csv(records)
    elif fmt == "json":
        text = render_json(records, config, channels)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def main(argv=None) -> int:
    config, args = parse_args(argv)
    if args.dry_run:
        print(json.dumps(config.to_dict(), indent=2))
        return 0

    result = run_experiment(config, workers=args.workers, timing=not args.no_timing)
    try:
        emit_results(result.records, config, channels=result.channels)
    except OSError as exc:
        print(f"latred: cannot write {config.output_path}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE

    print(f"{'algorithm':<10} {'total reduce time [s]':>22}")
    for name, t in summarize_timing(result.channels):
        print(f"{name:<10} {t:>22.4f}")
    print(f"wrote {len(result.records)} records to {config.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
