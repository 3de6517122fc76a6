"""Command-line front end.

Subcommands: theory (closed-form constants), simulate (streaming Monte
Carlo), exact (enumeration/Markov oracles), validate-shape, and report
(acceptance bundle with figures).  JSON output is the default, with exact
rationals rendered as "p/q" strings; --format csv emits floats for
plotting.  Every output embeds the configuration and the seed.

Exit codes: 0 success, 2 invalid arguments, 3 capacity guard,
4 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import acceptance as accept_mod
from . import oracle, shapes, theory
from .errors import CapacityError
from .simulate import SimConfig, run, sample_local_laws

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_ACCEPTANCE = 4

THEORY_TARGETS = (
    "mu", "sigma2", "p0", "pgf", "vdist", "edist", "ab", "density",
    "cltvar", "shape", "weakshape", "fates", "table2sling", "absorption",
)


def frac(x: Fraction) -> str:
    return str(x)


def _dec(x: Fraction) -> float:
    return float(x)


def _pmf_payload(pmf: theory.Pmf) -> dict:
    return {
        "exact": {str(v): frac(p) for v, p in pmf.probs},
        "decimal": {str(v): _dec(p) for v, p in pmf.probs},
        "mean": frac(pmf.mean()),
    }


def _theory_payload(args) -> dict:
    n = args.n
    target = args.target
    if target == "mu":
        v = theory.loop_rate(n)
        return {"exact": frac(v), "decimal": _dec(v)}
    if target == "sigma2":
        v = theory.loop_rate_variance(n)
        return {"exact": frac(v), "decimal": _dec(v)}
    if target == "p0":
        v = theory.reset_probability(n)
        return {"exact": frac(v), "decimal": _dec(v)}
    if target == "pgf":
        g = theory.loop_increment_pgf(n)
        return {
            "coefficients": [frac(c) for c in g.coeffs],
            "decimal": [_dec(c) for c in g.coeffs],
            "mean": frac(g.mean()),
            "variance": frac(g.variance()),
        }
    if target == "vdist":
        return _pmf_payload(theory.level_occupancy_dist(n))
    if target == "edist":
        return _pmf_payload(theory.layer_crossing_dist(n))
    if target == "ab":
        a, b = theory.across_bend_rates(n)
        return {
            "across": {"exact": frac(a), "decimal": _dec(a)},
            "bends": {"exact": frac(b), "decimal": _dec(b)},
        }
    if target == "density":
        d = theory.transverse_density(n)
        per = theory.transverse_per_level_mean(n)
        return {
            "density": {"exact": frac(d), "decimal": _dec(d)},
            "per_level": {"exact": frac(per), "decimal": _dec(per)},
        }
    if target == "cltvar":
        v = theory.transverse_clt_variance(n)
        return {"exact": frac(v), "decimal": _dec(v)}
    if target == "shape":
        if not args.shape:
            raise ValueError("--shape WORD is required for the shape target")
        r = theory.shape_rate(n, args.shape)
        return {
            "word": args.shape,
            "weak": list(shapes.weak_of_strong(args.shape)),
            "mu": {"exact": frac(r.mu), "decimal": _dec(r.mu)},
            "autocov": [frac(k) for k in r.autocov],
            "sigma2": {"exact": frac(r.sigma2), "decimal": _dec(r.sigma2)},
        }
    if target == "weakshape":
        if not args.weak:
            raise ValueError('--weak "a0,a1,..." is required for the weakshape target')
        a = shapes.parse_weak(args.weak)
        r = theory.weak_shape_rate(n, a)
        return {
            "weak": list(a),
            "gamma": shapes.gamma(a),
            "mu": {"exact": frac(r.mu), "decimal": _dec(r.mu)},
            "sigma2": {"exact": frac(r.sigma2), "decimal": _dec(r.sigma2)},
        }
    if target == "fates":
        f = theory.sling_fate_probs(n)
        return {
            key: {"exact": frac(getattr(f, key)), "decimal": _dec(getattr(f, key))}
            for key in (
                "to_string", "to_loop", "survive", "geo_param",
                "eventual_string", "pair_eventual_string",
            )
        }
    if target == "table2sling":
        table = theory.two_sling_table(n)
        labels = dict(theory.TWO_SLING_EVENTS)
        return {
            row: {"event": labels[row], "exact": frac(p), "decimal": _dec(p)}
            for row, p in table.items()
        }
    if target == "absorption":
        return _pmf_payload(theory.string_absorption_dist(n))
    raise ValueError(f"unknown theory target {target!r}")


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append([prefix, obj])


def _emit(doc: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        rows: list = []
        _flatten("", doc, rows)
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["key", "value"])
        writer.writerows(rows)
        sys.stdout.write(out.getvalue())


def cmd_theory(args) -> int:
    payload = _theory_payload(args)
    doc = {"command": "theory", "target": args.target, "n": args.n}
    if args.shape:
        doc["shape"] = args.shape
    if args.weak:
        doc["weak"] = args.weak
    doc["result"] = payload
    _emit(doc, args.format)
    return EXIT_OK


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a JSON object")
    return doc


def cmd_simulate(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}

    def pick(name, cli_value, default):
        if cli_value is not None:
            return cli_value
        if name in file_cfg:
            return file_cfg[name]
        return default

    trackers = pick("trackers", args.trackers, "loops,resets")
    if isinstance(trackers, str):
        trackers = tuple(x for x in trackers.split(",") if x)
    shape_filter = pick("shape_filter", args.shape_filter, "")
    if isinstance(shape_filter, str):
        shape_filter = tuple(x for x in shape_filter.split(",") if x)
    if shape_filter and "shapes" not in trackers:
        trackers = tuple(trackers) + ("shapes",)
    default_workers = int(os.environ.get("BRAUERSIM_WORKERS", "1"))
    cfg = SimConfig(
        n=pick("n", args.n, None),
        t=pick("t", args.t, None),
        seed=pick("seed", args.seed, 0),
        replicas=int(pick("replicas", args.replicas, 1)),
        trackers=tuple(trackers),
        shape_filter=tuple(shape_filter),
        shape_cap=int(pick("shape_cap", args.shape_cap, 64)),
        stretch_cap=int(pick("stretch_cap", args.stretch_cap, 32)),
        probe_count=int(pick("probe_count", args.probes, 0)),
        burn_in=int(pick("burn_in", None, 64)),
        workers=int(pick("workers", args.workers, default_workers)),
    )
    if cfg.n is None or cfg.t is None:
        raise ValueError("--n and --t are required (flags or config file)")
    if "local" in cfg.trackers and cfg.probe_count > 0:
        report = sample_local_laws(cfg)
    else:
        report = run(cfg)
    if args.format == "json":
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    else:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerows(report.to_csv_rows())
        sys.stdout.write(out.getvalue())
    return EXIT_OK


def cmd_exact(args) -> int:
    doc = {
        "command": "exact",
        "n": args.n,
        "t": args.t,
        "stat": args.stat,
        "modified": not args.unmodified,
    }
    if args.engine == "enumeration":
        pmf = oracle.exact_by_enumeration(
            args.n,
            args.t,
            args.stat,
            modified=not args.unmodified,
            word=args.word,
            level=args.level,
            layer=args.layer,
        )
    else:
        if args.stat != "loops":
            raise ValueError("the markov engine supports the loops statistic")
        pmf = oracle.markov_loop_count_dist(args.n, args.t)
    doc["engine"] = args.engine
    doc["result"] = _pmf_payload(pmf)
    _emit(doc, args.format)
    return EXIT_OK


def cmd_validate_shape(args) -> int:
    word = args.word
    accepted = shapes.validate_strong(word, args.n)
    doc = {"command": "validate-shape", "n": args.n, "word": word, "accepted": accepted}
    if accepted:
        a = shapes.weak_of_strong(word)
        doc["weak"] = list(a)
        doc["gamma"] = shapes.gamma(a)
        doc["stretch"] = shapes.stretch(a)
    _emit(doc, args.format)
    return EXIT_OK


def cmd_report(args) -> int:
    from . import report as report_mod

    numbers = None
    if args.criteria:
        numbers = [int(x) for x in args.criteria.split(",") if x]

    def progress(res):
        print(
            f"criterion {res.number:2d} {res.name:32s} {res.status}"
            f" ({res.seconds:.1f}s)",
            file=sys.stderr,
            flush=True,
        )

    results, figures = report_mod.render_report(
        Path(args.outdir), numbers=numbers, figures=not args.no_figures,
        progress=progress,
    )
    for res in results:
        print(f"criterion {res.number:2d}: {res.status}  {res.name}")
    print(f"report written to {args.outdir} ({len(figures)} figures)")
    if not all(r.passed for r in results):
        return EXIT_ACCEPTANCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brauersim",
        description="Random Brauer diagrams: exact theory, simulation, oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="evaluate a closed-form constant or law")
    p.add_argument("target", choices=THEORY_TARGETS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--shape", type=str, default=None)
    p.add_argument("--weak", type=str, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="streaming Monte Carlo run")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--seed", type=str, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--trackers", type=str, default=None,
                   help="comma list of loops,transverse,shapes,resets,local")
    p.add_argument("--shape-filter", dest="shape_filter", type=str, default=None,
                   help="comma list of words to track with block statistics")
    p.add_argument("--shape-cap", dest="shape_cap", type=int, default=None)
    p.add_argument("--stretch-cap", dest="stretch_cap", type=int, default=None)
    p.add_argument("--probes", type=int, default=None,
                   help="number of V/E probes (with the local tracker)")
    p.add_argument("--workers", type=int, default=None,
                   help="process count for replicas (default $BRAUERSIM_WORKERS)")
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact law from the oracles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--stat", choices=oracle.STATISTICS, default="loops")
    p.add_argument("--word", type=str, default=None)
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--unmodified", action="store_true")
    p.add_argument("--engine", choices=("enumeration", "markov"),
                   default="enumeration")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("validate-shape", help="check a strong-shape word")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--word", type=str, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_validate_shape)

    p = sub.add_parser("report", help="run the acceptance bundle with figures")
    p.add_argument("--outdir", type=str, default="report_out")
    p.add_argument("--criteria", type=str, default=None,
                   help="comma list of criterion numbers (default: all)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity guard: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, shapes.ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
