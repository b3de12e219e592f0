"""Batch command-line front end.

Usage:
    weakvalues run      --builtin simple-mzi
    weakvalues run      --builtin cheshire --observable sigma_z_R --out report.json
    weakvalues sweep    --builtin simple-mzi --count 8 --out sweep.csv
    weakvalues sweep    --builtin nested-mzi --g 0.05 --delta-list 1,2,4,8,16,32
    weakvalues diagnose --builtin nested-mzi
    weakvalues sample   --builtin simple-mzi --g 0.05 --runs 1000000 --seed 7

Exit codes: 0 success, 1 usage error, 2 invalid scenario,
3 undefined weak value or zero postselection.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import analysis as an
from . import protocol as pr
from .errors import (SchemaError, UndefinedWeakValue, UnknownLabel, ValidationError,
                     ZeroPostselection)
from .hilbert import label_str
from .scenarios import BUILTINS, Scenario, builtin, load_scenario_file, scenario_hash

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_UNDEFINED = 0, 1, 2, 3

log = logging.getLogger("weakvalues")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(z) -> list:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def _fmt(x: float) -> str:
    x = float(f"{x:.12g}") + 0.0
    return f"{x:.12g}"


def _fmt_complex(z) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-12:
        return _fmt(z.real)
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}i"


def _csv_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load(args) -> Scenario:
    if args.scenario:
        s = load_scenario_file(args.scenario)
    else:
        s = builtin(args.builtin)
    if args.observable:
        s = s.with_observable(args.observable)
    return s


def _schedule(args, s: Scenario) -> pr.GSchedule:
    g_max = args.g_max if args.g_max is not None else 0.1 * s.meter.delta
    return pr.GSchedule(g_max, args.ratio, args.count)


def _header(s: Scenario, argv: Sequence[str]) -> dict:
    return {
        "tool": "weakvalues",
        "version": __version__,
        "command": list(argv),
        "scenario": s.name,
        "observable": s.observable_name,
        "scenario_sha256": scenario_hash(s),
        "convention": s.convention,
        "meter_delta": s.meter.delta,
    }


def _trace_json(trace) -> list:
    return [{"stage": t.stage, "full_overlap": _pair(t.full_overlap),
             "live_overlap": _pair(t.live_overlap)} for t in trace]


def _estimate_json(est: pr.WeakValueEstimate) -> dict:
    return {
        "value": est.value,
        "residual": est.residual,
        "method": est.method,
        "variable": est.variable,
        "table": [{est.variable: r[0], "pointer_mean": r[1], "pointer_mean_over_g": r[2],
                   "postselection_probability": p}
                  for r, p in zip(est.per_g_table, est.postselection_probabilities)],
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_run(args, argv) -> int:
    s = _load(args)
    diag = an.classify(s)
    if diag.analytic_weak_value is None:
        raise UndefinedWeakValue(f"<f|U_sys|in> vanishes for {s.name!r}")
    est = pr.operational_weak_value(s, _schedule(args, s))
    report = _header(s, argv)
    report.update({
        "analytic_weak_value": _pair(diag.analytic_weak_value),
        "operational": _estimate_json(est),
        "behavior": str(diag.behavior),
        "s_expectation": _pair(diag.s_expectation),
        "postselection_overlap": _pair(diag.postselection_overlap),
        "trace": _trace_json(diag.trace),
    })
    if diag.caveat:
        report["caveat"] = diag.caveat
    print(f"{s.name} [{s.observable_name}]: analytic {_fmt_complex(diag.analytic_weak_value)}, "
          f"operational {_fmt(est.value)} ± {est.residual:.1e}, {diag.behavior}")
    if args.out:
        _emit(_dump(report) if args.format != "csv" else _sweep_csv(est), args.out)
    return EXIT_OK


def _sweep_csv(est: pr.WeakValueEstimate) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([est.variable, "pointer_mean", "pointer_mean_over_g", "postselection_probability"])
    for (x, mean, ratio), p in zip(est.per_g_table, est.postselection_probabilities):
        w.writerow([repr(float(v)) for v in (x, mean, ratio, p)])
    buf.write(f"# extrapolated,{float(est.value)!r},residual,{float(est.residual)!r}\n")
    return buf.getvalue()


def cmd_sweep(args, argv) -> int:
    s = _load(args)
    if args.delta_list:
        g = args.g if args.g is not None else 0.05
        est = pr.delta_sweep_weak_value(s, g, args.delta_list)
    else:
        est = pr.operational_weak_value(s, _schedule(args, s))
    if args.format == "json":
        report = _header(s, argv)
        report["sweep"] = _estimate_json(est)
        _emit(_dump(report), args.out)
    else:
        _emit(_sweep_csv(est), args.out)
    if args.out:
        print(f"{s.name} [{s.observable_name}]: extrapolated {_fmt(est.value)} "
              f"± {est.residual:.1e} over {len(est.per_g_table)} {est.variable} values")
    return EXIT_OK


def cmd_diagnose(args, argv) -> int:
    s = _load(args)
    d = an.classify(s)
    print(f"scenario        {s.name} [{s.observable_name}]")
    print(f"<in|S|in>       {_fmt_complex(d.s_expectation)}")
    print(f"||S|in>||       {_fmt(d.source_norm)}")
    print(f"<f|U_sys|in>    {_fmt_complex(d.postselection_overlap)}")
    live = ", ".join(label_str(x) for x in s.live_labels)
    print(f"live arms       {live}")
    print(f"{'stage':<10} {'full overlap':>20} {'live overlap':>20}")
    for t in d.trace:
        print(f"{t.stage:<10} {_fmt_complex(t.full_overlap):>20} {_fmt_complex(t.live_overlap):>20}")
    if d.analytic_weak_value is not None:
        print(f"weak value      {_fmt_complex(d.analytic_weak_value)}")
    print(f"class           {d.behavior}")
    if d.caveat:
        print(f"note            {d.caveat}")
    report = _header(s, argv)
    report.update({
        "behavior": str(d.behavior),
        "s_expectation": _pair(d.s_expectation),
        "source_norm": d.source_norm,
        "postselection_overlap": _pair(d.postselection_overlap),
        "trace": _trace_json(d.trace),
        "analytic_weak_value": None if d.analytic_weak_value is None else _pair(d.analytic_weak_value),
        "live_labels": [label_str(x) for x in s.live_labels],
    })
    if d.caveat:
        report["caveat"] = d.caveat
    if args.out:
        _emit(_dump(report), args.out)
    return EXIT_OK


def cmd_sample(args, argv) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    if not args.g > 0:
        raise UsageError("--g must be positive")
    s = _load(args)
    mc = pr.monte_carlo_weak_value(s, args.g, args.runs, args.seed)
    print(f"{s.name} [{s.observable_name}] g={_fmt(args.g)}: estimate {mc.estimate:.6f} "
          f"± {mc.stderr:.6f} ({mc.accepted}/{mc.n_runs} accepted), exact {mc.exact:.6f}")
    report = _header(s, argv)
    report.update({
        "g": args.g,
        "seed": args.seed,
        "runs": mc.n_runs,
        "accepted": mc.accepted,
        "postselection_probability": mc.probability,
        "estimate": mc.estimate,
        "stderr": mc.stderr,
        "exact_pointer_mean_over_g": mc.exact,
    })
    if args.out:
        _emit(_dump(report), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakvalues", description="Weak-value simulation and diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="json"):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--builtin", choices=sorted(BUILTINS))
        src.add_argument("--scenario", metavar="PATH")
        p.add_argument("--observable", metavar="NAME")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=["json", "csv"], default=fmt_default)

    def schedule(p):
        p.add_argument("--g-max", type=float, default=None)
        p.add_argument("--ratio", type=float, default=0.5)
        p.add_argument("--count", type=int, default=8)

    p = sub.add_parser("run", help="analytic and operational weak value with classification")
    common(p)
    schedule(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="pointer means along a g or delta schedule")
    common(p, fmt_default="csv")
    schedule(p)
    p.add_argument("--delta-list", type=_csv_list, default=None)
    p.add_argument("--g", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="well-behavedness criteria and derailment trace")
    common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("sample", help="Monte Carlo pointer statistics")
    common(p)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"weakvalues: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, ValidationError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        for f in getattr(exc, "findings", []):
            print(f"  - {f}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, UnknownLabel) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UndefinedWeakValue, ZeroPostselection) as exc:
        print(f"undefined: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED


if __name__ == "__main__":
    sys.exit(main())
