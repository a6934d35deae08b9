"""Command-line entry point: ``bandtoeplitz {density,moments,sample,experiment,verify}``.

Exit codes: 0 success, 2 usage, 3 size limit, 4 resources, 5 schema/IO,
6 assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from fractions import Fraction

from . import __version__
from .densities import DensityModel, write_density_csv
from .eigen import spectrum
from .ensemble import (
    DISTRIBUTIONS,
    MEMORY_CAP,
    NORMALIZATIONS,
    SYMMETRY_CLASSES,
    EnsembleSpec,
    build_matrix,
)
from .errors import BandToeplitzError, SchemaError, SizeLimitError
from .harness import ExperimentConfig, run_experiment, verify_report, write_outputs
from .pairings import MAX_GOE_FAST_K, MAX_PAIRING_K, TraceWord, goe_moment, gue_moment, mixed_trace_gue
from .report import dumps_canonical, load_report

EXIT_USAGE = 2
EXIT_IO = 5
EXIT_ASSERT = 6
MAX_GRID = 10**6


class UsageError(Exception):
    pass


def _grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:n, got {text!r}")
    if not 1 <= n <= MAX_GRID or hi < lo or (n == 1 and hi != lo):
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}")
    return lo, hi, n


def _positive(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return val


def _choice(options):
    lookup = {o.lower(): o for o in options}

    def parse(text):
        try:
            return lookup[text.lower()]
        except KeyError:
            raise argparse.ArgumentTypeError(f"expected one of {', '.join(options)}, got {text!r}")

    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (all randomness flows from it)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=_positive, default=1, help="worker pool size for experiments")

    parser = argparse.ArgumentParser(prog="bandtoeplitz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[common], help="evaluate a limiting density on a grid")
    p.add_argument("--ensemble", type=_choice(("GUE", "GOE")), default="GUE")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--grid", type=_grid, default=(-4.0, 4.0, 81))

    p = sub.add_parser("moments", parents=[common], help="exact moment tables")
    p.add_argument("--ensemble", type=_choice(("gue", "goe", "mixed")), default="gue")
    p.add_argument("--m", type=_positive, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--k-max", type=int, default=None)
    group.add_argument("--word", type=str, default=None, help="trace word nu_1,...,nu_r")

    p = sub.add_parser("sample", parents=[common], help="sample one matrix")
    p.add_argument("--spec", default=None, help="ensemble spec JSON file")
    p.add_argument("--N", type=_positive, default=None)
    p.add_argument("--m", type=_positive, default=None)
    bw = p.add_mutually_exclusive_group()
    bw.add_argument("--b", type=_positive, default=None, help="fixed bandwidth")
    bw.add_argument("--alpha", type=float, default=None, help="power-law bandwidth exponent")
    bw.add_argument("--log-c", type=float, default=None, help="logarithmic bandwidth factor")
    p.add_argument("--symmetry", type=_choice(SYMMETRY_CLASSES), default=None)
    p.add_argument("--dist", type=_choice(DISTRIBUTIONS), default=None)
    p.add_argument("--normalization", type=_choice(NORMALIZATIONS), default="GueScaled")
    p.add_argument("--emit", choices=("spectrum", "matrix"), default="spectrum")
    p.add_argument("--memory-cap", type=int, default=MEMORY_CAP, help="band storage cap in bytes")

    p = sub.add_parser("experiment", parents=[common], help="run a Monte Carlo experiment")
    p.add_argument("--config", required=True)

    p = sub.add_parser("verify", parents=[common], help="recompute the references in a report")
    p.add_argument("--report", required=True)
    return parser


def _header(config):
    return [f"{k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(config.items())]


def _emit_table(args, config, columns, rows):
    buf = io.StringIO()
    if args.format == "json":
        payload = {"config": config, "rows": [dict(zip(columns, r)) for r in rows]}
        buf.write(dumps_canonical(payload))
    else:
        for line in _header(config):
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return buf.getvalue()


def cmd_density(args):
    lo, hi, n = args.grid
    model = DensityModel(args.m, args.ensemble)
    x, pdf, cdf = model.grid(lo, hi, n)
    config = {"command": "density", "ensemble": args.ensemble, "m": args.m, "grid": [lo, hi, n]}
    if args.format == "json":
        rows = [{"x": float(a), "pdf": float(b), "cdf": float(c)} for a, b, c in zip(x, pdf, cdf)]
        return dumps_canonical({"config": config, "rows": rows})
    buf = io.StringIO()
    write_density_csv(buf, x, pdf, cdf, header=_header(config))
    return buf.getvalue()


def _rational(value):
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def cmd_moments(args):
    ens = args.ensemble
    columns = ["ensemble", "m", "n", "word", "exact_rational", "exact_decimal"]
    rows = []
    if ens == "mixed":
        if args.word is None:
            raise UsageError("--ensemble mixed needs --word")
        word = TraceWord.parse(args.word)
        val = mixed_trace_gue(args.m, word)
        rows.append(["mixed", args.m, word.letters, str(word), _rational(val), float(val)])
        config = {"command": "moments", "ensemble": ens, "m": args.m, "word": str(word)}
    else:
        if args.word is not None:
            raise UsageError("--word applies to --ensemble mixed only")
        k_max = 4 if args.k_max is None else args.k_max
        if k_max < 0:
            raise UsageError("--k-max must be nonnegative")
        cap = 2 * (MAX_PAIRING_K if ens == "gue" else MAX_GOE_FAST_K)
        if k_max > cap:
            raise SizeLimitError(f"--k-max {k_max} exceeds the {ens} cap {cap}")
        fn = gue_moment if ens == "gue" else goe_moment
        for n in range(1, k_max + 1):
            val = fn(args.m, n)
            rows.append([ens, args.m, n, "", _rational(val), float(val)])
        config = {"command": "moments", "ensemble": ens, "m": args.m, "k_max": k_max}
    return _emit_table(args, config, columns, rows)


def _sample_spec(args):
    if args.spec:
        spec = EnsembleSpec.load(args.spec)
    else:
        if args.N is None:
            raise UsageError("sample needs --spec or --N")
        spec = EnsembleSpec(N=args.N)
    changes = {}
    if args.N is not None:
        changes["N"] = args.N
    if args.m is not None:
        changes["m"] = args.m
    if args.b is not None:
        changes["bandwidth"] = {"kind": "Fixed", "param": args.b}
    elif args.alpha is not None:
        changes["bandwidth"] = {"kind": "PowerLaw", "param": args.alpha}
    elif args.log_c is not None:
        changes["bandwidth"] = {"kind": "Logarithmic", "param": args.log_c}
    if args.symmetry is not None:
        changes["symmetry_class"] = args.symmetry
    if args.dist is not None:
        changes["distribution"] = args.dist
    if args.seed is not None:
        changes["seed"] = args.seed
    return spec.replace(**changes) if changes else spec


def cmd_sample(args):
    spec = _sample_spec(args)
    matrix = build_matrix(spec, args.normalization, memory_cap=args.memory_cap)
    config = {
        "command": "sample",
        "spec": spec.to_dict(),
        "b": spec.b,
        "normalization": args.normalization,
        "emit": args.emit,
    }
    if args.emit == "matrix":
        if args.format == "json":
            trip = [{"row": p, "col": q, "value": v} for p, q, v in matrix.triplets()]
            return dumps_canonical({"config": config, "triplets": trip})
        buf = io.StringIO()
        for line in _header(config):
            buf.write(f"# {line}\n")
        matrix.write_triplets(buf)
        return buf.getvalue()
    ev = spectrum(matrix).eigenvalues
    if args.format == "json":
        return dumps_canonical({"config": config, "eigenvalues": ev.tolist()})
    lines = [f"# {line}" for line in _header(config)] + [repr(float(v)) for v in ev]
    return "\n".join(lines) + "\n"


def cmd_experiment(args):
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{args.config}: not valid JSON ({exc})") from exc
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.threads != 1 or "threads" not in data:
        data["threads"] = args.threads
    data["output"] = None
    config = ExperimentConfig.from_dict(data)
    report = run_experiment(config)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    if args.out:
        write_outputs(report, args.out)
        text = ""
    else:
        text = dumps_canonical(asdict(report))
    failed = bool(report.hard_failures) or not report.complete
    return text, EXIT_ASSERT if failed else 0


def cmd_verify(args):
    report = load_report(args.report)
    try:
        diffs = verify_report(report)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{args.report}: report content does not match the schema ({exc})") from exc
    for d in diffs:
        print(f"DIFF {d['field']}: stored {d['stored']!r}, recomputed {d['recomputed']!r}", file=sys.stderr)
    print(f"{len(diffs)} difference(s)", file=sys.stderr)
    return dumps_canonical({"report": args.report, "differences": diffs}), EXIT_ASSERT if diffs else 0


COMMANDS = {
    "density": cmd_density,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
    "verify": cmd_verify,
}


def _join_values(argv):
    # grids such as -4:4:9 start with a dash; bind them to their flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            out.append(f"--grid={next(it, '')}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_join_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except BandToeplitzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    text, code = result if isinstance(result, tuple) else (result, 0)
    if text:
        if args.out and args.command != "experiment":
            with open(args.out, "w", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
