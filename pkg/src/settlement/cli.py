"""Command-line front end.

Exit codes: 0 success, 1 usage error or contract violation, 2 resource budget
exceeded.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path
from typing import Sequence

from . import output
from .builder import build_from_permutation, parse_permutation, simulate_one
from .enumeration import (
    conjecture1_report,
    count_preimages,
    enumerate_maximal,
    xs_distribution_exact,
    xu_distribution,
)
from .errors import ContractViolation, ResourceError
from .grid import Dims, format_config, parse_config, render_ascii
from .montecarlo import (
    SimulationPlan,
    density_table,
    monotonicity_report,
    percentile_band_sweep,
    run_batch,
)

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_RESOURCE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONTRACT, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [_positive(t) for t in text.split(",") if t.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _common(p: argparse.ArgumentParser, formats: Sequence[str], default: str) -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--output", "-o", type=Path, help="write here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from metadata")


def _dims_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--m", type=_positive, required=required, help="rows (north to south)")
    p.add_argument("--n", type=_positive, required=required, help="columns (west to east)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="settlement", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo batch for one grid size")
    _dims_args(p)
    p.add_argument("--runs", type=_positive, required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--histogram", action="store_true", help="emit the occupancy histogram (csv)")
    _common(p, ["csv", "json", "text"], "text")

    p = sub.add_parser("enumerate", help="list every maximal configuration")
    _dims_args(p)
    p.add_argument("--method", choices=["auto", "subset", "backtrack"], default="auto")
    _common(p, ["csv", "json", "text"], "text")

    p = sub.add_parser("census", help="count orderings building each maximal configuration")
    _dims_args(p)
    p.add_argument("--shards", type=_positive, default=1)
    p.add_argument("--workers", type=_positive, default=1)
    _common(p, ["csv", "json", "text"], "text")

    for name, helptext in (("xu", "exact law under uniform choice"), ("xs-exact", "exact law of the builder")):
        p = sub.add_parser(name, help=helptext)
        _dims_args(p)
        _common(p, ["csv", "json", "text"], "text")

    p = sub.add_parser("table", help="mean densities over a grid of sizes")
    p.add_argument("--ms", type=_int_list, required=True)
    p.add_argument("--ns", type=_int_list, required=True)
    p.add_argument("--runs", type=_positive, required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--workers", type=_positive, default=1)
    _common(p, ["csv", "json", "text"], "csv")

    p = sub.add_parser("sweep", help="mean and 5th/95th percentile band along one axis")
    p.add_argument("--fixed", choices=["m", "n", "square"], required=True)
    p.add_argument("--value", type=_positive, help="value of the fixed side")
    p.add_argument("--vary", type=_int_list, required=True)
    p.add_argument("--runs", type=_positive, required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--workers", type=_positive, default=1)
    _common(p, ["csv", "json"], "csv")

    p = sub.add_parser("render", help="print a configuration in the text grid format")
    _dims_args(p, required=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", type=Path, help="config file to re-render")
    src.add_argument("--perm", type=Path, help="permutation file to build")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--output", "-o", type=Path)

    p = sub.add_parser("check-conjectures", help="evidence for the census and monotonicity conjectures")
    _dims_args(p)
    p.add_argument("--ms", type=_int_list)
    p.add_argument("--ns", type=_int_list)
    p.add_argument("--runs", type=_positive, default=100)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--output", "-o", type=Path)
    p.add_argument("--no-timestamp", action="store_true")
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(64)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _emit(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "output", None):
        args.output.write_text(text)
    else:
        sys.stdout.write(text)


def _meta(args: argparse.Namespace, **fields) -> dict:
    return output.metadata(timestamp=not getattr(args, "no_timestamp", False), command=args.command, **fields)


def _cmd_simulate(args: argparse.Namespace) -> str:
    seed = _resolve_seed(args)
    dims = Dims(args.m, args.n)
    stats = run_batch(SimulationPlan(dims, args.runs, seed, args.workers))
    meta = _meta(args, dims=str(dims), runs=args.runs, seed=seed)
    if args.format == "json":
        return output.to_json(stats.as_dict(), meta)
    if args.format == "csv":
        if args.histogram:
            return output.to_csv(output.HISTOGRAM_HEADER, output.histogram_rows(stats), meta)
        return output.to_csv(output.STATS_HEADER, [output.stats_row(stats)], meta)
    lines = [
        f"mean density {stats.mean_density:.3f} (stderr {stats.std_error:.2g})",
        f"5th percentile {stats.p5:.3f}, 95th percentile {stats.p95:.3f}",
        "histogram " + " ".join(f"{k}:{v}" for k, v in stats.histogram.items()),
    ]
    return output.comment_block(meta) + "\n".join(lines) + "\n"


def _spectrum(spectrum: dict[int, int]) -> str:
    return " ".join(f"{k}:{v}" for k, v in sorted(spectrum.items()))


def _cmd_enumerate(args: argparse.Namespace) -> str:
    dims = Dims(args.m, args.n)
    result = enumerate_maximal(dims, args.method)
    meta = _meta(args, dims=str(dims), method=args.method, count=len(result))
    if args.format == "csv":
        return output.to_csv(output.ENUMERATION_HEADER, output.enumeration_rows(result), meta)
    if args.format == "json":
        data = {
            "spectrum": {str(k): v for k, v in result.occupancy_spectrum.items()},
            "configs": [{"occupancy": c.count, "grid": render_ascii(c).splitlines()} for c in result.configs],
        }
        return output.to_json(data, meta)
    blocks = [f"({i}) occupancy {c.count}\n{render_ascii(c)}" for i, c in enumerate(result.configs, 1)]
    return (output.comment_block(meta) + f"{len(result)} maximal configurations\n"
            + f"spectrum {_spectrum(result.occupancy_spectrum)}\n\n" + "\n\n".join(blocks) + "\n")


def _cmd_census(args: argparse.Namespace) -> str:
    dims = Dims(args.m, args.n)
    census = count_preimages(dims, shards=args.shards, workers=args.workers)
    meta = _meta(args, dims=str(dims), total=census.total)
    if args.format == "csv":
        return output.to_csv(output.CENSUS_HEADER, output.census_rows(census), meta)
    if args.format == "json":
        data = [{"grid": render_ascii(c).splitlines(), "occupancy": c.count, "count": v}
                for c, v in census.sorted_items()]
        return output.to_json(data, meta)
    blocks = [f"({i}) occupancy {c.count}, {v} orderings\n{render_ascii(c)}"
              for i, (c, v) in enumerate(census.sorted_items(), 1)]
    return output.comment_block(meta) + "\n\n".join(blocks) + "\n"


def _cmd_law(args: argparse.Namespace) -> str:
    dims = Dims(args.m, args.n)
    dist = xu_distribution(dims) if args.command == "xu" else xs_distribution_exact(dims)
    meta = _meta(args, dims=str(dims), kind=dist.kind)
    if args.format == "csv":
        return output.to_csv(output.PMF_HEADER, output.pmf_rows(dist), meta)
    if args.format == "json":
        data = {"pmf": [{"k": k, "numerator": p.numerator, "denominator": p.denominator}
                        for k, p in sorted(dist.pmf.items())],
                "mean_density": str(dist.mean_density())}
        return output.to_json(data, meta)
    lines = [f"P(occupancy={k}) = {p}" for k, p in sorted(dist.pmf.items())]
    lines.append(f"mean density = {dist.mean_density()} ~ {float(dist.mean_density()):.6f}")
    return output.comment_block(meta) + "\n".join(lines) + "\n"


def _cmd_table(args: argparse.Namespace) -> str:
    seed = _resolve_seed(args)
    table = density_table(args.ms, args.ns, args.runs, seed, workers=args.workers)
    meta = _meta(args, runs=args.runs, seed=seed)
    if args.format == "json":
        return output.to_json(output.table_json(table), meta)
    if args.format == "csv":
        return output.to_csv(output.TABLE_HEADER, output.table_rows(table), meta)
    width = max(6, *(len(str(n)) + 1 for n in args.ns))
    lines = ["m \\ n".ljust(8) + "".join(str(n).rjust(width) for n in args.ns)]
    for m in args.ms:
        cells = []
        for n in args.ns:
            s = table.stats(m, n)
            cells.append(("-" if s is None else f"{s.mean_density:.3f}").rjust(width))
        lines.append(str(m).ljust(8) + "".join(cells))
    return output.comment_block(meta) + "\n".join(lines) + "\n"


def _cmd_sweep(args: argparse.Namespace) -> str:
    if args.fixed != "square" and args.value is None:
        raise ContractViolation("--value is required unless --fixed square")
    seed = _resolve_seed(args)
    points = percentile_band_sweep(args.fixed, args.value, args.vary, args.runs, seed, workers=args.workers)
    meta = _meta(args, fixed=args.fixed, value=args.value, runs=args.runs, seed=seed)
    if args.format == "json":
        return output.to_json([s.as_dict() for s in points], meta)
    return output.to_csv(output.STATS_HEADER, [output.stats_row(s) for s in points], meta)


def _cmd_render(args: argparse.Namespace) -> str:
    if args.input is not None:
        config = parse_config(args.input.read_text())
    elif args.perm is not None:
        config = build_from_permutation(parse_permutation(args.perm.read_text()))
    else:
        if args.m is None or args.n is None:
            raise ContractViolation("render needs --input, --perm, or --m/--n with a seed")
        config = simulate_one(Dims(args.m, args.n), _resolve_seed(args))
    return format_config(config)


def _cmd_check(args: argparse.Namespace) -> str:
    dims = Dims(args.m, args.n)
    report = conjecture1_report(dims)
    lines = ["[census conjecture]"] + report.lines()
    fields = {"dims": str(dims)}
    if args.ms or args.ns:
        if not (args.ms and args.ns):
            raise ContractViolation("--ms and --ns must be given together")
        seed = _resolve_seed(args)
        fields.update(runs=args.runs, seed=seed)
        mono = monotonicity_report(density_table(args.ms, args.ns, args.runs, seed))
        lines += ["", "[monotonicity conjecture]"] + mono.lines()
    return output.comment_block(_meta(args, **fields)) + "\n".join(lines) + "\n"


_COMMANDS = {
    "simulate": _cmd_simulate,
    "enumerate": _cmd_enumerate,
    "census": _cmd_census,
    "xu": _cmd_law,
    "xs-exact": _cmd_law,
    "table": _cmd_table,
    "sweep": _cmd_sweep,
    "render": _cmd_render,
    "check-conjectures": _cmd_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _emit(args, _COMMANDS[args.command](args))
    except ResourceError as exc:
        print(f"settlement: resource budget '{exc.budget}' exceeded (limit {exc.limit}): {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ContractViolation, OSError) as exc:
        print(f"settlement: error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
