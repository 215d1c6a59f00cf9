"""Command-line front end.

    advdecay {simulate,classify,criteria,shoot,fixedpoint,sweep} --config run.toml
             [--output PATH] [--format csv|json] [--seed-from PATH] [--quiet]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 fixed-point iteration did not converge.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classify import ShootOutcome, classify, shoot_halflinear
from .config import RunConfig, load_config
from .core import EquationSpec, Trajectory
from .criteria import criterion_series, euler_threshold
from .exceptions import ConfigurationError, NumericalError
from .fixedpoint import Direction, build_envelope, iterate_T
from .recursion import InitialData, residual, simulate
from .serialize import dumps_csv, dumps_json, envelope_document, read_trajectory

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NONCONVERGED = 0, 1, 2, 3
COMMANDS = ("simulate", "classify", "criteria", "shoot", "fixedpoint", "sweep")


@dataclass
class Outcome:
    results: dict
    header: list
    rows: list
    summary: str
    code: int = EXIT_OK


def _trajectory_rows(traj: Trajectory, extra=None):
    rows = []
    for i, n in enumerate(traj.indices):
        q = traj.quasidiff[i] if i < traj.quasidiff.size else math.nan
        row = [int(n), traj.values[i], q]
        if extra is not None:
            row.append(extra[i] if i < len(extra) else math.nan)
        rows.append(row)
    return rows


def _simulated(cfg: RunConfig, spec: EquationSpec) -> Trajectory:
    sim = cfg.simulate
    if not sim.initial:
        raise ConfigurationError("simulate.initial is required (initial values or (x, quasidiff) pair)")
    start = spec.start_index if sim.start_index is None else sim.start_index
    return simulate(spec, InitialData(start, sim.initial, sim.kind), int(sim.horizon))


def _shot(cfg: RunConfig, spec: EquationSpec):
    sh = cfg.shoot
    target = spec.halflinear() if (sh.halflinear and spec.p > 1) else spec
    return target, shoot_halflinear(target, float(sh.x_start), int(sh.horizon), int(sh.max_bisections))


def _seeded(path, spec: EquationSpec) -> Trajectory:
    start, values = read_trajectory(path)
    return Trajectory.from_values(values, spec, start)


def cmd_simulate(cfg: RunConfig, seed_from=None) -> Outcome:
    spec = cfg.equation.build()
    traj = _simulated(cfg, spec)
    res = residual(spec, traj).tolist()
    return Outcome(
        {"trajectory": traj.to_dict(), "residual": res, "max_abs_residual": max(map(abs, res), default=0.0)},
        ["n", "x", "quasidiff", "residual"],
        _trajectory_rows(traj, res),
        f"simulated n = {traj.start_index}..{traj.end_index}",
    )


def cmd_classify(cfg: RunConfig, seed_from=None) -> Outcome:
    spec = cfg.equation.build()
    c = cfg.classify
    if seed_from is not None:
        traj = _seeded(seed_from, spec)
    elif c.source == "simulate":
        traj = _simulated(cfg, spec)
    elif c.source == "shoot":
        spec, shot = _shot(cfg, spec)
        if shot.trajectory is None:
            raise NumericalError(f"shooting gave {shot.outcome.value}; nothing to classify")
        traj = shot.trajectory
    else:
        raise ConfigurationError(f"classify.source must be 'simulate' or 'shoot', got {c.source!r}")
    report = classify(traj, spec, c.eps_x, c.q_min, c.burn_in)
    d = report.as_dict()
    rows = [[k, v] for k, v in d.items() if k != "thresholds"]
    rows += [[f"threshold.{k}", v] for k, v in d["thresholds"].items()]
    return Outcome({"classification": d, "window": [traj.start_index, traj.end_index]},
                   ["field", "value"], rows, f"verdict {report.verdict.value}")


def cmd_criteria(cfg: RunConfig, seed_from=None) -> Outcome:
    spec = cfg.equation.build()
    c = cfg.criteria
    rep = criterion_series(spec, c.N, c.shifted, c.log_scale)
    n = np.arange(spec.start_index, rep.truncation + 1)
    rows = [[int(k), s1, s2] for k, s1, s2 in zip(n, rep.j1.partial_sums, rep.j2.partial_sums)]
    results = rep.as_dict()
    results["J2"]["doubling_increments"] = rep.j2.doubling_increments().tolist()
    results["J1"]["doubling_increments"] = rep.j1.doubling_increments().tolist()
    return Outcome(results, ["n", "J1", "J2"], rows, f"combined {rep.combined.value}")


def cmd_shoot(cfg: RunConfig, seed_from=None) -> Outcome:
    spec = cfg.equation.build()
    target, shot = _shot(cfg, spec)
    results = shot.as_dict()
    rows = []
    if shot.trajectory is not None:
        results["trajectory"] = shot.trajectory.to_dict()
        results["classification"] = classify(shot.trajectory, target).as_dict()
        rows = _trajectory_rows(shot.trajectory)
    return Outcome(results, ["n", "x", "quasidiff"], rows, f"shoot {shot.outcome.value}")


def cmd_fixedpoint(cfg: RunConfig, seed_from=None) -> Outcome:
    spec = cfg.equation.build()
    fp = cfg.fixedpoint
    direction = Direction.parse(fp.direction)
    if direction is Direction.FORWARD:
        base = _seeded(seed_from, spec) if seed_from is not None else _simulated(cfg, spec)
    elif seed_from is not None:
        base = _seeded(seed_from, spec.halflinear())
    else:
        _, shot = _shot(cfg, spec)
        if shot.trajectory is None:
            raise NumericalError(f"shooting for the reverse base gave {shot.outcome.value}")
        base = shot.trajectory
    env = build_envelope(direction, base, spec, fp.anchor)
    run = iterate_T(direction, env, spec, fp.seed, int(fp.max_iter), float(fp.tol), float(fp.damping))
    results = run.as_dict()
    results["residuals"] = run.residuals
    rows = []
    if run.solution is not None:
        results["solution"] = run.solution.to_dict()
        rows = _trajectory_rows(run.solution)
    code = EXIT_OK if run.converged else EXIT_NONCONVERGED
    summary = (f"converged in {run.iterations} iterations" if run.converged
               else f"not converged after {run.iterations} iterations (residual {run.residuals[-1]:.3g})")
    return Outcome(results, ["n", "x", "quasidiff"], rows, summary, code)


def sweep_point(args) -> dict:
    """One γ of a sweep: threshold side, shooting, classification, criterion verdict."""
    cfg, gamma = args
    eq = cfg.equation
    alpha, p = float(eq.alpha), int(eq.p)
    thr = euler_threshold(alpha)
    row = {"gamma": gamma, "threshold": thr, "below_threshold": gamma <= thr}
    spec = eq.build(gamma=gamma)
    try:
        target, shot = _shot(cfg, spec)
        row["shoot"] = shot.outcome.value
        row["critical_quasidiff"] = shot.critical_quasidiff
        row["classify"] = classify(shot.trajectory, target).verdict.value if shot.outcome is ShootOutcome.FOUND else None
    except NumericalError as exc:
        row.update(shoot="NumericFailure", critical_quasidiff=math.nan, classify=None, error=str(exc))
    try:
        rep = criterion_series(spec, cfg.criteria.N, shifted=p > 1 or cfg.criteria.shifted,
                               log_scale=cfg.criteria.log_scale)
        row["criterion"] = rep.combined.value
    except NumericalError as exc:
        row["criterion"] = None
        row["error"] = str(exc)
    return row


def cmd_sweep(cfg: RunConfig, seed_from=None) -> Outcome:
    gammas = [float(g) for g in cfg.sweep.gammas]
    if not gammas:
        raise ConfigurationError("sweep.gammas must list at least one value")
    if any(not g > 0 for g in gammas):
        raise ConfigurationError("sweep.gammas must be positive")
    cfg.equation.build(gamma=gammas[0])   # validate once before fanning out
    workers = cfg.sweep.workers or min(len(gammas), os.cpu_count() or 1)
    tasks = [(cfg, g) for g in gammas]
    if workers <= 1 or len(gammas) == 1:
        rows = [sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_point, tasks))   # map keeps grid order
    header = ["gamma", "threshold", "below_threshold", "shoot", "classify", "criterion", "critical_quasidiff"]
    table = [[r.get(h) for h in header] for r in rows]
    return Outcome({"rows": rows}, header, table, f"swept {len(rows)} values of gamma")


HANDLERS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "criteria": cmd_criteria,
    "shoot": cmd_shoot,
    "fixedpoint": cmd_fixedpoint,
    "sweep": cmd_sweep,
}


HELP = {
    "simulate": "march the equation forward from initial data",
    "classify": "classify a simulated or loaded trajectory",
    "criteria": "evaluate the series criteria and the comparison test",
    "shoot": "shoot for the critical initial quasidifference",
    "fixedpoint": "run the fixed-point reduction between equations",
    "sweep": "shoot, classify and evaluate criteria over a grid of gamma",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advdecay", description="Decaying solutions of advanced half-linear difference equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, metavar="PATH", help="TOML run configuration")
        p.add_argument("--output", metavar="PATH", help="write results here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), help="output format (default from config)")
        p.add_argument("--seed-from", metavar="PATH", help="trajectory file (JSON output or CSV with n,x)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary line on stderr")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed_from is not None and args.command not in ("classify", "fixedpoint"):
            raise ConfigurationError("--seed-from applies to classify and fixedpoint only")
        outcome = HANDLERS[args.command](cfg, args.seed_from)
    except ConfigurationError as exc:
        print(f"advdecay {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"advdecay {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    fmt = args.format or cfg.output.format
    if fmt == "json":
        text = dumps_json(envelope_document(args.command, cfg.as_dict(), outcome.results))
    else:
        text = dumps_csv(outcome.header, outcome.rows, int(cfg.output.precision))
    dest = args.output or cfg.output.path
    if dest:
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not args.quiet:
        print(f"advdecay {args.command}: {outcome.summary}", file=sys.stderr)
    return outcome.code


def main():
    sys.exit(run())
