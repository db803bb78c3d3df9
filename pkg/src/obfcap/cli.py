"""Command line interface: ``obfcap outage|capacity|simulate|validate``.

Exit codes: 0 success, 1 failed property or validation, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from .capacity import capacity_finite_d, large_system_capacity
from .model import Kind, ModelError, PathLossModel, SystemConfig, check_epsilon
from .montecarlo import (
    MIN_CAPACITY_TRIALS, Mode, SimSeed, empirical_outage_capacity, ks_band, run_trials,
)
from .outage import rate_outage
from .report import CsvReport, SweepSpec, fmt, parse_grid, read_config_document
from .validation import analytic_rate_cdf, run_all

LOG2 = math.log(2.0)

GRID_HELP = ("grid spec: lin:start:stop:count, log:start:stop:count "
             "or an explicit comma list (strictly increasing)")

DEFAULTS = {"lambda": "1", "radius": "1", "beams": "2", "power": "1", "alpha": "4",
            "model": "unbounded"}

# flags that never change the numbers in a report
_NOT_REPRODUCED = {"out", "workers", "command", "config", "dump_samples"}


class UsageError(Exception):
    pass


def _positive_float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _radius(text):
    if text.strip().lower() in ("inf", "infinite"):
        return math.inf
    return _positive_float(text)


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _add_system_flags(p, many=False):
    p.add_argument("--config", metavar="PATH",
                   help="flat key=value or JSON document with keys lambda, radius, beams, "
                        "power, model, alpha, d0; explicit flags win")
    p.add_argument("--lambda", dest="lam", metavar="F" + ("[,F...]" if many else ""),
                   help="user intensity, > 0 (default 1)")
    p.add_argument("--radius", metavar="F|inf", help="cell radius (default 1)")
    p.add_argument("--beams", metavar="INT", help="number of beams M (default 2)")
    p.add_argument("--power", metavar="F", help="transmit power per beam rho, > 0 (default 1)")
    p.add_argument("--alpha", metavar="F", help="path-loss exponent, > 2 (default 4)")
    p.add_argument("--model", metavar="NAME" + ("[,NAME...]" if many else ""),
                   help="unbounded | bounded | guard:<d0> | shifted (default unbounded)")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--json", action="store_true", help="JSON instead of CSV")
    p.add_argument("--bits", action="store_true", help="show rates in bits/s/Hz")
    p.add_argument("--workers", type=int, default=1, metavar="INT",
                   help="parallel worker processes; output does not depend on it")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="obfcap",
        description="Beam outage probability and outage capacity of opportunistic "
                    "beamforming with Poisson user locations. Rates are in nats/s/Hz.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("outage", help="beam outage probability F_r(x) over a rate grid",
                       description="Beam outage probability per model and intensity. " + GRID_HELP)
    _add_system_flags(p, many=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rate", type=_positive_float, metavar="F", help="single target rate (nats)")
    g.add_argument("--rate-grid", metavar="SPEC", help="target rate grid (nats); " + GRID_HELP)
    p.add_argument("--method", choices=("auto", "closed", "quadrature"), default="auto")

    p = sub.add_parser("capacity", help="beam outage capacity, optionally swept",
                       description="Outage capacity for finite or infinite cells. " + GRID_HELP)
    _add_system_flags(p, many=True)
    p.add_argument("--epsilon", type=_positive_float, default=0.1, metavar="F",
                   help="outage tolerance in (0, 1) (default 0.1)")
    p.add_argument("--sweep", choices=("lambda", "radius", "alpha", "epsilon"),
                   help="parameter to sweep")
    p.add_argument("--grid", metavar="SPEC", help="sweep grid; " + GRID_HELP)
    p.add_argument("--method", choices=("auto", "closed", "quadrature"), default="auto")

    p = sub.add_parser("simulate", help="Monte Carlo rate CDF against the analytic CDF",
                       description="Simulate the network, compare with the analytic CDF. "
                                   "Exit code 0 iff the KS distance is inside the 99%% band.")
    _add_system_flags(p)
    p.add_argument("--trials", type=int, default=100_000, metavar="INT",
                   help=f"number of trials, >= {MIN_CAPACITY_TRIALS} (default 100000)")
    p.add_argument("--seed", type=_seed, default=1, metavar="U64", help="master seed (default 1)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PROJECTION.value)
    p.add_argument("--epsilon", type=_positive_float, default=0.1, metavar="F",
                   help="outage tolerance for the capacity estimate (default 0.1)")
    p.add_argument("--rate-grid", metavar="SPEC",
                   help="rates at which to print the CDFs (default 101 points up to the "
                        "99.9%% sample quantile); " + GRID_HELP)
    p.add_argument("--dump-samples", metavar="PATH", help="write raw rates, one per line")

    p = sub.add_parser("validate", help="run the property suite")
    p.add_argument("--quick", action="store_true", help="subsampled grids")
    p.add_argument("--json", action="store_true", help="machine-readable results")
    p.add_argument("--only", metavar="NAME[,NAME...]", help="run only these properties")
    return parser


def _resolve(args):
    """Merge config document, flags and defaults into strings per key."""
    doc = {}
    if getattr(args, "config", None):
        doc = {k: str(v) for k, v in read_config_document(args.config).items()}
    values = dict(DEFAULTS)
    values.update(doc)
    flags = {"lambda": args.lam, "radius": args.radius, "beams": args.beams,
             "power": args.power, "alpha": args.alpha, "model": args.model}
    values.update({k: v for k, v in flags.items() if v is not None})
    if "d0" in doc and values["model"] == "guard":
        values["model"] = f"guard:{doc['d0']}"
    return values


def _split(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _systems(values, many):
    """Validated (configs by lambda, models) from resolved values."""
    lams = _split(values["lambda"])
    models = _split(values["model"])
    if not many and (len(lams) != 1 or len(models) != 1):
        raise UsageError("this command takes a single --lambda and --model")
    try:
        radius = _radius(values["radius"])
        beams = float(values["beams"])
        power = float(values["power"])
        alpha = float(values["alpha"])
        lam_values = [float(v) for v in lams]
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None
    configs = [SystemConfig(lam, radius, beams, power) for lam in lam_values]
    parsed = [PathLossModel.parse(m, alpha) for m in models]
    return configs, parsed


def _reproduce_line(args, values):
    parts = ["obfcap", args.command]
    merged = dict(vars(args))
    merged.update(lam=values["lambda"], radius=values["radius"], beams=values["beams"],
                  power=values["power"], alpha=values["alpha"], model=values["model"])
    for key in sorted(merged):
        value = merged[key]
        if key in _NOT_REPRODUCED or value is None or value is False:
            continue
        flag = "--" + ("lambda" if key == "lam" else key.replace("_", "-"))
        parts.append(flag if value is True else f"{flag} {fmt(value)}")
    return " ".join(parts)


def _system_metadata(report, args, values):
    report.meta("command", _reproduce_line(args, values))
    for key in ("lambda", "radius", "beams", "power", "alpha", "model"):
        report.meta(key, values[key])
    report.meta("rate_unit", "bits/s/Hz" if args.bits else "nats/s/Hz")


def _pmap(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _rate_scale(args):
    return 1.0 / LOG2 if args.bits else 1.0


def _outage_row(job):
    rate, configs, models, method = job
    return [rate_outage(c, m, rate, method).rate_cdf_value for m in models for c in configs]


def cmd_outage(args):
    values = _resolve(args)
    configs, models = _systems(values, many=True)
    if args.rate is not None:
        rates = [args.rate]
    else:
        rates = parse_grid(args.rate_grid or "lin:0:5:51")
    if any(r < 0 for r in rates):
        raise ModelError("target rates must be >= 0")
    scale = _rate_scale(args)
    header = ["rate_bits" if args.bits else "rate", "sinr_threshold"]
    header += [f"F_r:{m.label}:lambda={c.lam:g}" for m in models for c in configs]
    report = CsvReport(header)
    _system_metadata(report, args, values)
    report.meta("method", args.method)
    rows = _pmap(_outage_row, [(r, configs, models, args.method) for r in rates], args.workers)
    for rate, row in zip(rates, rows):
        report.add_row([rate * scale, math.expm1(rate)] + row)
    return report, 0


def _capacity_point(job):
    config, model, eps, method, with_doubling = job
    check_epsilon(eps)
    sol = capacity_finite_d(config, model, eps, method)
    asym = doubling = math.nan
    if model.kind in (Kind.UNBOUNDED, Kind.BOUNDED):
        asym = large_system_capacity(config, model, eps).capacity_nats
        if with_doubling:
            squared = large_system_capacity(config.replace(lam=config.lam**2), model, eps)
            doubling = squared.capacity_nats - asym
    return sol.capacity_nats, sol.outage_floor, asym, doubling


def cmd_capacity(args):
    values = _resolve(args)
    configs, models = _systems(values, many=True)
    if len(configs) != 1:
        raise UsageError("capacity takes one --lambda; use --sweep lambda for several")
    if bool(args.sweep) != bool(args.grid):
        raise UsageError("--sweep and --grid go together")
    check_epsilon(args.epsilon)
    scale = _rate_scale(args)
    unit = "bits" if args.bits else "nats"
    with_doubling = args.sweep == "lambda"
    header = [args.sweep or "point"]
    for m in models:
        header += [f"C_out_{unit}:{m.label}", f"floor:{m.label}", f"C_inf_{unit}:{m.label}"]
        if with_doubling:
            header.append(f"doubling_{unit}:{m.label}")
    report = CsvReport(header)
    _system_metadata(report, args, values)
    report.meta("epsilon", args.epsilon)
    report.meta("method", args.method)
    grid = parse_grid(args.grid) if args.sweep else [0.0]
    jobs = []
    for value in grid:
        for m in models:
            if args.sweep:
                config, model, eps = SweepSpec(args.sweep, (value,), configs[0], m,
                                               args.epsilon).point(value)
            else:
                config, model, eps = configs[0], m, args.epsilon
            jobs.append((config, model, eps, args.method, with_doubling))
    results = iter(_pmap(_capacity_point, jobs, args.workers))
    for value in grid:
        row = [value]
        for _ in models:
            cap, floor, asym, doubling = next(results)
            row += [cap * scale, floor, asym * scale]
            if with_doubling:
                row.append(doubling * scale)
        report.add_row(row)
    return report, 0


def cmd_simulate(args):
    values = _resolve(args)
    configs, models = _systems(values, many=False)
    config, model = configs[0], models[0]
    if not config.finite:
        raise UsageError("simulate needs a finite --radius")
    if args.trials < MIN_CAPACITY_TRIALS:
        raise UsageError(f"--trials must be >= {MIN_CAPACITY_TRIALS}, got {args.trials}")
    check_epsilon(args.epsilon)
    cdf = run_trials(config, model, args.trials, SimSeed(args.seed), Mode(args.mode),
                     workers=max(1, args.workers))
    if args.dump_samples:
        cdf.dump(args.dump_samples)
    analytic, left = analytic_rate_cdf(config, model)
    ks = cdf.ks_distance(analytic, left)
    band = ks_band(args.trials)
    emp_cap = empirical_outage_capacity(cdf, args.epsilon)
    ana = capacity_finite_d(config, model, args.epsilon)
    if args.rate_grid:
        rates = parse_grid(args.rate_grid)
    else:
        top = cdf.quantile(0.999)
        rates = parse_grid(f"lin:0:{top!r}:101") if top > 0 else [0.0]
    scale = _rate_scale(args)
    report = CsvReport(["rate_bits" if args.bits else "rate", "empirical_cdf", "analytic_cdf"])
    _system_metadata(report, args, values)
    report.meta("trials", args.trials)
    report.meta("seed", args.seed)
    report.meta("mode", args.mode)
    report.meta("epsilon", args.epsilon)
    report.meta("empty_cell_fraction", float(cdf.cdf(0.0)))
    report.meta("empirical_capacity", emp_cap * scale)
    report.meta("analytic_capacity", ana.capacity_nats * scale)
    report.meta("analytic_outage_floor", ana.outage_floor)
    report.meta("ks_distance", ks)
    report.meta("ks_band_99", band)
    report.meta("ks_pass", ks <= band)
    for r in rates:
        report.add_row([r * scale, float(cdf.cdf(r)), analytic(r)])
    return report, 0 if ks <= band else 1


def cmd_validate(args, stdout):
    names = set(_split(args.only)) if args.only else None
    results = run_all(quick=args.quick, names=names)
    if names and not results:
        raise UsageError(f"no property named {args.only!r}")
    failed = [r for r in results if not r.passed]
    if args.json:
        doc = {"passed": not failed, "properties": [r.as_dict() for r in results]}
        stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        for r in results:
            stdout.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:28s} {r.seconds:7.2f}s  {r.detail}\n")
        stdout.write(f"{len(results) - len(failed)}/{len(results)} properties passed\n")
    return 1 if failed else 0


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return cmd_validate(args, stdout)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        handler = {"outage": cmd_outage, "capacity": cmd_capacity, "simulate": cmd_simulate}
        report, code = handler[args.command](args)
    except (UsageError, ModelError, OSError) as exc:
        stderr.write(f"obfcap {args.command}: error: {exc}\n")
        return 2
    text = report.to_json() if args.json else report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
