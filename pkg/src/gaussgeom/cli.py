"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check or a numerical step failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from . import chart, dynamics, lie, quadrature, statstruct
from .errors import DomainError, GeometryError

COMMANDS = ("fisher", "connection", "verify", "characterize", "geodesic", "natgrad")
FISHER_TOL = 1e-10
CUBIC_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    command: str
    lam: float = chart.SQRT2
    alpha: Optional[float] = None
    seed: int = 0
    tolerance: float = 1e-9
    output_path: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.format not in ("json", "csv"):
            raise DomainError("format must be json or csv")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def make_report(command: str, passed: bool, residuals: dict, details: dict) -> dict:
    return {"command": command, "pass": bool(passed), "residuals": _jsonable(residuals), "details": _jsonable(details)}


# ---------------------------------------------------------------------------
# commands


def cmd_fisher(cfg: RunConfig, args) -> dict:
    rule = quadrature.hermite_rule(args.order)
    mus = np.linspace(args.mu_min, args.mu_max, args.grid)
    sigmas = np.geomspace(args.sigma_min, args.sigma_max, args.grid)
    worst_g = worst_c = worst_g_abs = worst_c_abs = 0.0
    for mu in mus:
        for sigma in sigmas:
            theta = quadrature.GaussianParam(mu, sigma)
            p = theta.as_point()
            dg = quadrature.fisher_matrix_numeric(theta, rule) - chart.metric_at(chart.SQRT2, p).components
            dc = quadrature.cubic_numeric(theta, rule).components - chart.cubic_form_closed(chart.SQRT2, p).components
            worst_g_abs = max(worst_g_abs, float(np.abs(dg).max()))
            worst_c_abs = max(worst_c_abs, float(np.abs(dc).max()))
            # g ~ sigma^-2 and C ~ sigma^-3: compare in scale-free units
            worst_g = max(worst_g, float(np.abs(dg).max()) * sigma ** 2)
            worst_c = max(worst_c, float(np.abs(dc).max()) * sigma ** 3)
    passed = worst_g < FISHER_TOL and worst_c < CUBIC_TOL
    return make_report(
        "fisher",
        passed,
        {"fisher_scaled": worst_g, "cubic_scaled": worst_c, "fisher_abs": worst_g_abs, "cubic_abs": worst_c_abs},
        {
            "order": args.order,
            "grid": [args.grid, args.grid],
            "mu_range": [args.mu_min, args.mu_max],
            "sigma_range": [args.sigma_min, args.sigma_max],
            "thresholds": {"fisher": FISHER_TOL, "cubic": CUBIC_TOL},
        },
    )


def cmd_connection(cfg: RunConfig, args) -> dict:
    alpha = 1.0 if cfg.alpha is None else cfg.alpha
    p = chart.ChartPoint(args.x, args.y)
    coord = chart.alpha_christoffels(alpha, cfg.lam, p)
    frame = lie.alpha_connection_left_invariant(alpha, cfg.lam)
    pushed = lie.frame_to_coordinates(cfg.lam, p, frame, "connection")
    resid = float(np.abs(pushed - coord).max())
    names = ("x", "y")
    enames = ("e1", "e2")
    coord_table = {f"Gamma^{names[k]}_{names[i]}{names[j]}": coord[k, i, j]
                   for k in range(2) for i in range(2) for j in range(2)}
    frame_table = {f"nabla_{enames[i]} {enames[j]}": {enames[k]: frame.comps[k, i, j] for k in range(2)}
                   for i in range(2) for j in range(2)}
    return make_report(
        "connection",
        resid < cfg.tolerance,
        {"frame_vs_coordinates": resid},
        {"alpha": alpha, "lambda": cfg.lam, "point": [p.x, p.y],
         "coordinate_table": coord_table, "frame_table": frame_table},
    )


def cmd_verify(cfg: RunConfig, args) -> dict:
    if cfg.alpha is not None or args.perturb:
        s = statstruct.StatisticalStructure.alpha(0.0 if cfg.alpha is None else cfg.alpha, cfg.lam)
        if args.perturb:
            s = statstruct.perturb_off_family(s, args.perturb, np.random.default_rng(cfg.seed))
        rep = statstruct.verify_conditions(s, cfg.lam, cfg.tolerance)
        details = rep.to_dict()
        details.update({"mode": "single", "cond1": rep.cond1, "perturb": args.perturb,
                        "all_equal": rep.consistent,
                        "decomposition_residual": statstruct.curvature_decomposition_residual(s)})
        return make_report("verify", rep.consistent, rep.residuals, details)
    sweep = statstruct.equivalence_sweep(args.n_structures, args.n_family, cfg.lam, cfg.seed, cfg.tolerance)
    return make_report(
        "verify",
        sweep.passed,
        {"max_in_family": sweep.max_residual(True), "min_off_family": sweep.min_residual(False)},
        {"mode": "sweep", "lambda": cfg.lam, "tolerance": cfg.tolerance, "seed": cfg.seed,
         "n_random": args.n_structures, "n_family": args.n_family,
         "disagreements": sweep.disagreements, "membership_errors": sweep.membership_errors,
         "in_family_all_true": sum(all(r.conditions) for r, f in zip(sweep.reports, sweep.expected_in_family) if f),
         "off_family_all_false": sum(not any(r.conditions) for r, f in zip(sweep.reports, sweep.expected_in_family) if not f)},
    )


def cmd_characterize(cfg: RunConfig, args) -> dict:
    ch = statstruct.characterize_solutions(cfg.lam)
    p = 1.0
    s = ch.structure(p)
    alpha_rec, _ = statstruct.recover_alpha(s, cfg.lam)
    alpha_map = ch.alpha_from_p(p)
    residuals = {"pattern": ch.pattern_residual, "alpha_map": abs(alpha_rec - alpha_map)}
    passed = ch.dimension == 1 and ch.pattern_residual < 1e-10 and residuals["alpha_map"] < 1e-12
    enames = ("e1", "e2")
    table = {f"nabla_{enames[i]} {enames[j]}": {enames[k]: s.mu.comps[k, i, j] for k in range(2)}
             for i in range(2) for j in range(2)}
    return make_report(
        "characterize",
        passed,
        residuals,
        {"lambda": cfg.lam, "nullspace_dimension": ch.dimension, "basis": ch.basis,
         "coordinates": ["C111", "C112", "C122", "C222"], "generator": ch.generator,
         "singular_values": ch.singular_values, "connection_table_p1": table,
         "alpha_at_p1": alpha_map, "alpha_recovered_p1": alpha_rec},
    )


def cmd_geodesic(cfg: RunConfig, args):
    alpha = 1.0 if cfg.alpha is None else cfg.alpha
    init = dynamics.GeodesicState(chart.ChartPoint(args.x0, args.y0), (args.vx, args.vy))
    traj = dynamics.integrate_geodesic(alpha, cfg.lam, init, args.step, args.steps)
    if cfg.format == "csv":
        return dynamics.trajectory_csv(traj, args.step)
    e = [dynamics.speed_squared(cfg.lam, s) for s in traj]
    return make_report(
        "geodesic",
        True,
        {"speed_squared_drift": max(e) - min(e)},
        {"alpha": alpha, "lambda": cfg.lam, "step": args.step, "steps": args.steps,
         "trajectory": [[i * args.step, s.point.x, s.point.y, *s.velocity] for i, s in enumerate(traj)]},
    )


def cmd_natgrad(cfg: RunConfig, args) -> dict:
    if args.data:
        samples = dynamics.SampleSet.from_file(args.data)
    else:
        with resources.as_file(resources.files("gaussgeom") / "data" / "samples.txt") as path:
            samples = dynamics.SampleSet.from_file(path)
    init = quadrature.GaussianParam(args.mu0, args.sigma0)
    fit = dynamics.natural_gradient_fit(samples, init, args.rate, cfg.tolerance, args.max_iter)
    mle = samples.mle()
    err = max(abs(fit.theta.mu - mle.mu), abs(fit.theta.sigma - mle.sigma))
    try:
        plain = dynamics.gradient_fit(samples, init, tol=cfg.tolerance)
        plain_iters = plain.iterations if plain.converged else None
    except GeometryError:
        plain_iters = None
    return make_report(
        "natgrad",
        fit.converged and err < 10 * cfg.tolerance,
        {"mle_error": err, "gradient_norm": float(np.linalg.norm(dynamics.nll_gradient(fit.theta, samples)))},
        {"n": len(samples), "theta": [fit.theta.mu, fit.theta.sigma], "mle": [mle.mu, mle.sigma],
         "iterations": fit.iterations, "converged": fit.converged,
         "gradient_descent_iterations": plain_iters, "rate": args.rate},
    )


HANDLERS = {
    "fisher": cmd_fisher,
    "connection": cmd_connection,
    "verify": cmd_verify,
    "characterize": cmd_characterize,
    "geodesic": cmd_geodesic,
    "natgrad": cmd_natgrad,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=_positive, default=chart.SQRT2,
                        help="metric scale; sqrt(2) is the Fisher metric (default)")
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_positive, default=1e-9)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="gaussgeom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fisher", parents=[common], help="quadrature Fisher metric / cubic form vs closed forms")
    p.add_argument("--order", type=int, default=quadrature.DEFAULT_ORDER)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--mu-min", type=float, default=-5.0)
    p.add_argument("--mu-max", type=float, default=5.0)
    p.add_argument("--sigma-min", type=_positive, default=0.1)
    p.add_argument("--sigma-max", type=_positive, default=10.0)

    p = sub.add_parser("connection", parents=[common], help="alpha-connection tables in both frames")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=_positive, default=1.0)

    p = sub.add_parser("verify", parents=[common], help="check the five equivalent conditions")
    p.add_argument("--perturb", type=_positive, default=None,
                   help="push the --alpha structure off the family by this amount")
    p.add_argument("--n-structures", type=int, default=500)
    p.add_argument("--n-family", type=int, default=100)

    sub.add_parser("characterize", parents=[common], help="nullspace of the symmetry condition")

    p = sub.add_parser("geodesic", parents=[common], help="integrate an alpha-geodesic (CSV by default)")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=_positive, default=1.0)
    p.add_argument("--vx", type=float, default=0.0)
    p.add_argument("--vy", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--step", type=_positive, default=1e-3)

    p = sub.add_parser("natgrad", parents=[common], help="natural-gradient fit of a normal model")
    p.add_argument("--data", default=None, help="file of observations (default: bundled sample)")
    p.add_argument("--mu0", type=float, default=0.0)
    p.add_argument("--sigma0", type=_positive, default=1.0)
    p.add_argument("--rate", type=_positive, default=1.0)
    p.add_argument("--max-iter", type=int, default=200)
    return parser


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerow(["command", report["command"]])
    w.writerow(["pass", report["pass"]])
    for k, v in report["residuals"].items():
        w.writerow([f"residual.{k}", repr(v)])
    return buf.getvalue()


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (2) and --help (0)
        return exc.code if isinstance(exc.code, int) else 2
    fmt = args.format or ("csv" if args.command == "geodesic" else "json")
    try:
        cfg = RunConfig(args.command, args.lam, args.alpha, args.seed, args.tol, args.out, fmt)
        result = HANDLERS[args.command](cfg, args)
    except DomainError as exc:
        print(f"gaussgeom: error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"gaussgeom: numerical failure: {exc}", file=sys.stderr)
        return 1
    if isinstance(result, str):
        text, passed = result, True
    else:
        text = json.dumps(result, indent=2) + "\n" if fmt == "json" else _to_csv(result)
        passed = result["pass"]
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if passed else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
