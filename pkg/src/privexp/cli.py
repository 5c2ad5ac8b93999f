"""Command-line entry point: ``privexp <command> ...``.

Exit codes: 0 success, 1 a check ran and failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .beliefs import BeliefEngine, BeliefSystem
from .errors import GenericityViolation, HypothesisViolated, PriorTooLow, RootNotBracketed
from .evaluator import eval_profile
from .histories import all_histories, parse
from .model import DEFAULT_PARAMS, ModelParams, cutoff_set, experiment_counts
from .profiles import CATALOG, build_profile
from .simulate import SimConfig, simulate
from .verify import (
    check_nodes,
    nash_check_sigma_n,
    one_shot_deviation_check,
    sufficient_extra_rounds,
    threshold_conditions,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class ConfigError(UsageError):
    def __init__(self, message, line=None, col=None):
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line, self.col = line, col


def _params(text):
    try:
        return ModelParams.from_string(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _profile(args):
    try:
        return build_profile(args.profile, args.params)
    except (HypothesisViolated, PriorTooLow, RootNotBracketed) as exc:
        raise UsageError(f"profile {args.profile!r} does not apply here: {exc}") from None
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _emit(text, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


# -- cutoffs ---------------------------------------------------------------------------

def cmd_cutoffs(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GenericityViolation)
        cuts = cutoff_set(args.params, args.n_max)
    checks = cuts.orderings(args.params)
    if args.json:
        data = {"format": "cutoffs/1", "params": args.params.to_dict(), **cuts.to_dict(),
                "orderings": checks, "warnings": [str(w.message) for w in caught]}
        _emit(json.dumps(_jsonable(data), indent=2), args.out)
    else:
        lines = []
        for key, value in cuts.to_dict().items():
            if key in ("p_hat_n", "p_star_n"):
                shown = ", ".join(f"{v:.6g}" for v in value[: min(len(value), 6)])
                lines.append(f"{key:<14} {shown}, ...")
            elif key != "generic":
                lines.append(f"{key:<14} {value:.10g}" if isinstance(value, float) else f"{key:<14} {value}")
        for name, holds in checks.items():
            lines.append(f"{'PASS' if holds else 'FAIL'}  {name}")
        for w in caught:
            lines.append(f"WARN  {w.message}")
        _emit("\n".join(lines), args.out)
    return OK if all(checks.values()) else FAILED


# -- eval / verify / simulate ------------------------------------------------------------

def cmd_eval(args):
    prof = _profile(args)
    report = eval_profile(prof)
    data = report.to_dict(unnormalized=args.unnormalized)
    if args.json:
        _emit(json.dumps(_jsonable(data), indent=2), args.out)
    else:
        dist = ", ".join(f"{k}: {v:.6g}" for k, v in report.experiments_given_bad.items())
        _emit("\n".join([
            f"profile        {prof.name}",
            f"gamma1         {data['gamma1']:.12g}",
            f"gamma2         {data['gamma2']:.12g}",
            f"given G        {data['given_good'][0]:.12g}  {data['given_good'][1]:.12g}",
            f"given B        {data['given_bad'][0]:.12g}  {data['given_bad'][1]:.12g}",
            f"N_e | B        {{{dist}}}",
        ]), args.out)
    return OK


def cmd_verify(args):
    prof = _profile(args)
    if args.history:
        try:
            histories = [parse(h) for h in args.history]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = check_nodes(prof, histories, args.belief_mode)
    else:
        depth = args.depth
        if depth is None:
            counts, _ = experiment_counts(args.params)
            depth = 2 * (counts["N_hat"] + 3)
        report = one_shot_deviation_check(prof, depth, args.belief_mode)
    if args.out:
        Path(args.out).write_text(report.to_csv())
    if args.json:
        print(report.to_json(all_nodes=args.all_nodes))
    else:
        print(f"{report.verdict}  {prof.name}  depth={report.depth}  nodes={len(report.nodes)}  "
              f"max_gain={report.max_gain:.3e}  beliefs={report.belief_mode}")
        for n in report.failures:
            print(f"  FAIL {n.history or '(empty)'}  player {n.player}  {n.deviation}  gain={n.gain:.6g}")
    return OK if report.verdict == "PASS" else FAILED


def cmd_simulate(args):
    prof = _profile(args)
    result = simulate(SimConfig(prof, runs=args.runs, seed=args.seed, theta=args.theta))
    if args.json:
        _emit(json.dumps(_jsonable(result.to_dict()), indent=2), args.out)
        return OK
    exact = eval_profile(prof)
    lines = [f"profile {prof.name}  runs={result.runs}  seed={result.seed}"]
    for i, name in enumerate(("gamma1", "gamma2")):
        lines.append(f"{name}  {result.mean[i]:.8f} +/- {result.stderr[i]:.2e}   exact {getattr(exact, name):.8f}")
    for theta, hist in result.experiments.items():
        total = sum(hist.values())
        shown = ", ".join(f"{k}: {v / total:.4f}" for k, v in sorted(hist.items(), key=lambda kv: str(kv[0])))
        lines.append(f"N_e | {theta}  {{{shown}}}")
    _emit("\n".join(lines), args.out)
    return OK


def cmd_beliefs_dump(args):
    prof = _profile(args)
    engine = getattr(prof, "beliefs", None)
    if engine is None or engine.mode != args.mode:
        engine = BeliefEngine(args.params, prof.prob_risky, args.mode)
    system = BeliefSystem(engine, (args.depth + 1) // 2)
    buf = io.StringIO()
    system.write_csv(list(all_histories(args.depth)), buf)
    _emit(buf.getvalue(), args.out)
    return OK


# -- reproduce ----------------------------------------------------------------------------

def cmd_reproduce(args):
    from .reproduce import TARGETS, run_target

    names = list(TARGETS) if args.target == "all" else [args.target]
    if any(n not in TARGETS for n in names):
        raise UsageError(f"unknown target {args.target!r}; choose from all, {', '.join(TARGETS)}")
    status = OK
    for name in names:
        outcome = run_target(name, args.out)
        print(f"{'PASS' if outcome.ok else 'FAIL'}  {name}")
        for line in outcome.lines:
            print(f"      {line}")
        if not outcome.ok:
            status = FAILED
    return status


# -- sweep --------------------------------------------------------------------------------

PARAM_KEYS = {"lambda": "success_rate", "delta": "discount", "c": "cost", "m": "prize", "p0": "prior"}
EXTRA_AXES = {"n", "depth"}
CUTOFF_METRICS = {"p_star", "p_star_social", "p_tilde", "p_hat", "p_myop", "p_bar",
                  "N_star", "N_star_social", "N_tilde", "N_hat", "generic"}
OTHER_METRICS = {"N_e", "verdict", "max_gain", "gamma1", "gamma2", "thm5_n", "thm5_stated", "thm5_refined",
                 "sigma_n_nash", "sigma_n_closed_form", "sigma_n_sufficient", "orderings"}


def _position(text, needle):
    """1-based (line, column) of the first occurrence of ``needle`` in ``text``."""
    at = text.find(needle)
    if at < 0:
        return None, None
    line = text.count("\n", 0, at) + 1
    return line, at - (text.rfind("\n", 0, at) + 1) + 1


def _axis_values(name, spec, text):
    if isinstance(spec, list) and spec and all(isinstance(v, (int, float)) for v in spec):
        return [float(v) if name in PARAM_KEYS else int(v) for v in spec]
    if isinstance(spec, dict) and set(spec) == {"start", "stop", "num"}:
        values = np.linspace(spec["start"], spec["stop"], int(spec["num"]))
        return [float(v) if name in PARAM_KEYS else int(round(v)) for v in values]
    raise ConfigError(f"axis {name!r} must be a list of numbers or {{start, stop, num}}",
                      *_position(text, f'"{name}"'))


def load_sweep(path):
    text = Path(path).read_text()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object", 1, 1)
    unknown = set(config) - {"name", "base", "axes", "metrics", "profile", "depth"}
    for key in sorted(unknown):
        raise ConfigError(f"unknown config key {key!r}", *_position(text, f'"{key}"'))
    base = dict(config.get("base", {}))
    for key in base:
        if key not in PARAM_KEYS:
            raise ConfigError(f"unknown parameter {key!r}", *_position(text, f'"{key}"'))
    axes = config.get("axes")
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("config needs a non-empty 'axes' object", *_position(text, '"axes"'))
    grid = {}
    for name, spec in axes.items():
        if name not in PARAM_KEYS and name not in EXTRA_AXES:
            raise ConfigError(f"unknown axis {name!r}", *_position(text, f'"{name}"'))
        grid[name] = _axis_values(name, spec, text)
    metrics = config.get("metrics")
    if not isinstance(metrics, list) or not metrics:
        raise ConfigError("config needs a non-empty 'metrics' list", *_position(text, '"metrics"'))
    for m in metrics:
        if m not in CUTOFF_METRICS | OTHER_METRICS:
            raise ConfigError(f"unknown metric {m!r}", *_position(text, f'"{m}"'))
    missing = set(PARAM_KEYS) - set(base) - set(grid)
    if missing:
        raise ConfigError(f"parameters {sorted(missing)} are neither in 'base' nor on an axis",
                          *_position(text, '"base"'))
    if {"N_e", "verdict", "max_gain", "gamma1", "gamma2"} & set(metrics) and "profile" not in config:
        raise ConfigError("profile metrics need a 'profile' entry", *_position(text, '"metrics"'))
    return {"name": config.get("name", Path(path).stem), "base": base, "axes": grid, "metrics": metrics,
            "profile": config.get("profile"), "depth": config.get("depth")}


def _sweep_point(config, point):
    values = {**config["base"], **point}
    row = dict(point)
    try:
        params = ModelParams(**{PARAM_KEYS[k]: values[k] for k in PARAM_KEYS})
    except ValueError as exc:
        return {**row, "error": str(exc)}
    n = int(values.get("n", 0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GenericityViolation)
        try:
            cuts = cutoff_set(params, 1)
            prof = None
            for metric in config["metrics"]:
                if metric in CUTOFF_METRICS:
                    row[metric] = getattr(cuts, metric)
                elif metric == "orderings":
                    row[metric] = all(cuts.orderings(params).values())
                elif metric.startswith("thm5_"):
                    cond = threshold_conditions(params)
                    row[metric] = cond[metric[5:]]
                elif metric.startswith("sigma_n_"):
                    if metric == "sigma_n_sufficient":
                        row[metric] = sufficient_extra_rounds(params.success_rate, n, cuts.N_star)
                    else:
                        check = nash_check_sigma_n(params, n)
                        row[metric] = check["brute_force" if metric == "sigma_n_nash" else "closed_form"]
                else:
                    if prof is None:
                        spec = config["profile"].replace("{n}", str(n))
                        prof = build_profile(spec, params)
                    if metric in ("N_e", "gamma1", "gamma2"):
                        report = eval_profile(prof)
                        row["N_e"] = ";".join(f"{k}:{v:.6g}" for k, v in report.experiments_given_bad.items())
                        row["gamma1"], row["gamma2"] = report.gamma1, report.gamma2
                    else:
                        depth = int(values.get("depth") or config["depth"] or 2 * (cuts.N_hat + 3))
                        report = one_shot_deviation_check(prof, depth)
                        row["verdict"], row["max_gain"] = report.verdict, report.max_gain
        except (HypothesisViolated, PriorTooLow, RootNotBracketed) as exc:
            row["error"] = str(exc)
    row["generic"] = not any(issubclass(w.category, GenericityViolation) for w in caught)
    return row


def run_sweep(config, jobs=1):
    names = list(config["axes"])
    points = [dict(zip(names, combo)) for combo in itertools.product(*config["axes"].values())]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_sweep_point, [config] * len(points), points, chunksize=8))
    else:
        rows = [_sweep_point(config, p) for p in points]
    # map() keeps input order, so rows follow the grid order whatever the worker count
    columns = names + [m for m in config["metrics"] if m not in names]
    for extra in ("N_e", "gamma1", "gamma2", "verdict", "max_gain", "generic", "error"):
        if extra not in columns and any(extra in r for r in rows):
            columns.append(extra)
    return columns, rows


def cmd_sweep(args):
    config = load_sweep(args.config)
    columns, rows = run_sweep(config, args.jobs)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    if args.out:
        meta = {"format": "sweep/1", "name": config["name"], "points": len(rows), "columns": columns,
                "config": config}
        Path(args.out).with_suffix(".json").write_text(json.dumps(_jsonable(meta), indent=2))
    return OK


# -- parser -------------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="privexp", description="Two-player experimentation with private outcomes: cutoffs, payoffs, equilibrium checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, profile=True):
        p.add_argument("--params", type=_params, default=DEFAULT_PARAMS, metavar="L,D,C,M,P0",
                       help="lambda,delta,c,m,p0 (default 0.2,0.9,1,10,0.6)")
        if profile:
            p.add_argument("--profile", default="threshold_phat",
                           help=f"name[:key=value,...]; one of {', '.join(CATALOG)}")
        p.add_argument("--json", action="store_true")
        p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("cutoffs", help="cutoff table with ordering checks")
    common(p, profile=False)
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_cutoffs)

    p = sub.add_parser("eval", help="exact payoffs of a profile")
    common(p)
    p.add_argument("--unnormalized", action="store_true", help="report undiscounted-sum payoffs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="one-shot deviation check")
    common(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--history", action="append", help="check only these histories (repeatable)")
    p.add_argument("--belief-mode", choices=["reasonable", "appendix_b", "public"])
    p.add_argument("--all-nodes", action="store_true", help="include every checked node in --json output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo play")
    common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--theta", choices=["G", "B"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="regenerate a published result")
    p.add_argument("target", help="target name or 'all'")
    p.add_argument("--out", default="reproduce-out", help="output directory")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("beliefs-dump", help="belief table of a profile as CSV")
    common(p)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--mode", choices=["reasonable", "appendix_b"], default="reasonable")
    p.set_defaults(func=cmd_beliefs_dump)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"privexp {args.command}: error: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"privexp {args.command}: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
