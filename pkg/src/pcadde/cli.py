"""Command-line front-end: simulate | compare | sweep | yorke | halanay-root.

Loads a JSON problem file, runs the requested computation, and writes CSV /
JSON tables plus optional self-contained SVG plots into the output directory.
Exit codes: 0 ok, 1 configuration error, 2 numeric error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, discretizer, halanay, reference, svgplot
from .discretizer import PcaExtension, StepSize, extend, iterate
from .errors import FitError, NumericOverflowError
from .model import ConstantHistory, PolynomialHistory, ProblemSpec, load_problem

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 1, 2, 3

# Plot the extension at h/5 so the piecewise structure of z_h stays visible
# even at the coarsest steps.
PLOT_POINTS_PER_STEP = 5


@dataclass
class RunConfig:
    command: str
    problem: str | None = None
    horizon: float = 10.0
    k: int | None = None
    k_list: list[int] | None = None
    fine_step: float | None = None
    out_dir: str = "."
    plot: bool = False
    constants: str | None = None
    fit: bool = False
    alpha: float | None = None
    beta: float | None = None
    q: float | None = None


def _prepare_out_dir(cfg: RunConfig) -> str:
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    if not os.path.isdir(out) or not os.access(out, os.W_OK):
        raise OSError(f"output directory {out!r} is not writable")
    return out


def _load(cfg: RunConfig) -> ProblemSpec:
    if not cfg.problem:
        raise ValueError("a problem file is required (--problem)")
    if not os.path.exists(cfg.problem):
        raise ValueError(f"problem file not found: {cfg.problem}")
    return load_problem(cfg.problem)


def _steps_for(spec: ProblemSpec, k: int, horizon: float) -> tuple[StepSize, int]:
    step = StepSize(spec.q, k)
    return step, int(math.ceil(horizon / step.h - 1e-9))


def _default_fine_step(spec: ProblemSpec, cfg: RunConfig) -> float:
    return cfg.fine_step if cfg.fine_step else spec.q / 256.0


def cmd_simulate(cfg: RunConfig) -> int:
    spec = _load(cfg)
    out = _prepare_out_dir(cfg)
    if cfg.horizon <= 0:
        raise ValueError(f"horizon must be positive, got {cfg.horizon}")
    k = cfg.k or 1
    step, n_steps = _steps_for(spec, k, cfg.horizon)
    traj = iterate(spec, step, n_steps)
    discretizer.write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
    if cfg.plot:
        ts = np.linspace(0.0, traj.horizon, n_steps * PLOT_POINTS_PER_STEP + 1)
        zs = [extend(traj, float(t)) for t in ts]
        svg = svgplot.line_plot([("z_h", list(ts), zs)],
                                title=f"{spec.label}, h={step.h:g}", y_label="z_h(t)")
        svgplot.write_svg(svg, os.path.join(out, "trajectory.svg"))
    print(f"simulate: wrote {n_steps} steps at h={step.h:g} to {out}")
    return 0


def _compare_single(spec: ProblemSpec, cfg: RunConfig, out: str) -> int:
    step, n_steps = _steps_for(spec, cfg.k, cfg.horizon)
    traj = iterate(spec, step, n_steps)
    sol = reference.solve_reference(spec, cfg.horizon, _default_fine_step(spec, cfg))
    report = analysis.measured_error(sol, PcaExtension(traj), cfg.horizon)
    lines = ["n,t,z,x,abs_error"]
    for n, t, err in report.grid_errors:
        lines.append(f"{n},{t:.17g},{traj.value(n):.17g},{sol.eval(t):.17g},{err:.17g}")
    with open(os.path.join(out, "compare.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    summary = {
        "k": step.k, "h": step.h, "T": cfg.horizon,
        "measured_max_error": report.measured_max_error,
        "bound": report.bound, "dominated": report.dominated,
        "oracle_tol": report.oracle_tol,
    }
    with open(os.path.join(out, "compare_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if cfg.plot:
        ts = np.linspace(0.0, cfg.horizon, n_steps * PLOT_POINTS_PER_STEP + 1)
        xs = [sol.eval(float(t)) for t in ts]
        zs = [extend(traj, float(t)) for t in ts]
        svg = svgplot.line_plot(
            [("reference x", list(ts), xs), ("scheme z_h", list(ts), zs)],
            title=f"{spec.label}, h={step.h:g}", y_label="x(t), z_h(t)")
        svgplot.write_svg(svg, os.path.join(out, "compare.svg"))
    verdict = "dominates" if report.dominated else "VIOLATED"
    print(f"compare: max error {report.measured_max_error:.6g}, "
          f"bound {report.bound:.6g} ({verdict})")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    spec = _load(cfg)
    out = _prepare_out_dir(cfg)
    if cfg.horizon <= 0:
        raise ValueError(f"horizon must be positive, got {cfg.horizon}")
    if cfg.k_list:
        rows = analysis.convergence_study(spec, cfg.horizon, cfg.k_list,
                                          fine_step=cfg.fine_step)
        with open(os.path.join(out, "convergence.csv"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(analysis.convergence_csv(rows))
        for row in rows:
            print(f"k={row.k:4d} h={row.h:<10.6g} measured={row.measured:<12.6g} "
                  f"bound={row.bound:.6g}")
        return 0
    if not cfg.k:
        raise ValueError("compare needs --k or --k-list")
    return _compare_single(spec, cfg, out)


def cmd_sweep(cfg: RunConfig) -> int:
    spec = _load(cfg)
    out = _prepare_out_dir(cfg)
    if cfg.constants:
        if not os.path.exists(cfg.constants):
            raise ValueError(f"constants file not found: {cfg.constants}")
        tc = halanay.load_constants(cfg.constants)
    elif cfg.fit:
        sol = reference.solve_reference(spec, cfg.horizon, _default_fine_step(spec, cfg))
        trials = [ConstantHistory(5.0, spec.q), ConstantHistory(1.0, spec.q),
                  PolynomialHistory((1.0, 1.0), spec.q)]
        tc = halanay.fit_transfer_constants(sol, trials)
        with open(os.path.join(out, "constants.json"), "w", encoding="utf-8") as fh:
            fh.write(tc.to_json())
        print(f"fitted constants: K={tc.K:.6g} sigma={tc.sigma:.6g} M0={tc.M0:.6g}")
    else:
        raise ValueError("sweep needs --constants <file> or --fit")
    k_max = cfg.k or 32
    rows = halanay.admissible_steps(spec, tc, k_max)
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(halanay.sweep_csv(rows))
    first = next((row.k for row in rows if row.admissible), None)
    if first is None:
        print(f"sweep: no admissible step up to k={k_max}")
    else:
        print(f"sweep: admissible from k={first} on (of {k_max})")
    return 0


def cmd_yorke(cfg: RunConfig) -> int:
    spec = _load(cfg)
    out = _prepare_out_dir(cfg)
    verdict = analysis.yorke_check(spec.a, spec.q)
    with open(os.path.join(out, "yorke.json"), "w", encoding="utf-8") as fh:
        fh.write(verdict.to_json())
    print(f"yorke: alpha*q = {verdict.alpha_q:.6g} -> {verdict.verdict}")
    return 0


def cmd_halanay_root(cfg: RunConfig) -> int:
    if cfg.alpha is None or cfg.beta is None or cfg.q is None:
        raise ValueError("halanay-root needs --alpha, --beta and --q")
    problem = halanay.HalanayProblem(cfg.alpha, cfg.beta, cfg.q)
    eta = halanay.solve_eta(problem)
    residual = abs(eta - cfg.alpha + cfg.beta * math.exp(eta * cfg.q))
    print(f"eta = {eta:.17g}")
    print(f"residual = {residual:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcadde",
        description="Grid discretization of linear variable-delay equations: "
                    "simulation, error measurement, and stability-transfer checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("--problem", required=True, help="JSON problem file")
        p.add_argument("--T", type=float, default=10.0, dest="horizon",
                       help="time horizon (default 10)")
        p.add_argument("--fine-step", type=float, default=None,
                       help="reference-solver step (default q/256)")
        p.add_argument("--out", default=".", dest="out_dir",
                       help="output directory (default .)")
        p.add_argument("--plot", action="store_true", help="also write SVG plots")

    p = sub.add_parser("simulate", help="run the difference scheme, dump trajectory CSV")
    common(p)
    p.add_argument("--k", type=int, default=1, help="steps per delay window (h = q/k)")

    p = sub.add_parser("compare", help="scheme vs reference: error report or convergence table")
    common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-list", default=None, dest="k_list",
                   help="comma-separated k values for a convergence table")

    p = sub.add_parser("sweep", help="admissibility sweep sigma > K1(h) over k = 1..k_max")
    common(p)
    p.add_argument("--k", type=int, default=32, help="largest k to sweep (default 32)")
    p.add_argument("--constants", default=None, help="transfer-constants JSON file")
    p.add_argument("--fit", action="store_true",
                   help="fit transfer constants from trial runs instead")

    p = sub.add_parser("yorke", help="coefficient-bound stability criterion verdict")
    common(p)

    p = sub.add_parser("halanay-root", help="solve eta = alpha - beta*exp(eta*q)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--q", type=float, required=True)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    k_list = None
    if getattr(args, "k_list", None):
        try:
            k_list = [int(tok) for tok in str(args.k_list).split(",") if tok.strip()]
        except ValueError as exc:
            raise ValueError(f"--k-list must be comma-separated integers: {exc}") from None
    return RunConfig(
        command=args.command,
        problem=getattr(args, "problem", None),
        horizon=getattr(args, "horizon", 10.0),
        k=getattr(args, "k", None),
        k_list=k_list,
        fine_step=getattr(args, "fine_step", None),
        out_dir=getattr(args, "out_dir", "."),
        plot=getattr(args, "plot", False),
        constants=getattr(args, "constants", None),
        fit=getattr(args, "fit", False),
        alpha=getattr(args, "alpha", None),
        beta=getattr(args, "beta", None),
        q=getattr(args, "q", None),
    )


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "yorke": cmd_yorke,
    "halanay-root": cmd_halanay_root,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericOverflowError, FitError, ArithmeticError, RuntimeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
