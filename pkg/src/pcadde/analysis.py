"""Moduli of continuity, error bounds and measurements, convergence and stability checks.

The compact-interval error bound ties the scheme error to the problem data:

    max |x - z_h| over [0, T]  <=  exp(A) * A * w_x(w_r(h) + 2h)

with A the coefficient integral over [0, T], w_r the delay modulus at scale h,
and w_x the solution modulus at the perturbation scale of the snapped argument.
The solution modulus of the unknown x is replaced by the reference oracle's,
so the measured/bound comparison carries an explicit oracle tolerance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .discretizer import DiscreteTrajectory, PcaExtension, StepSize, guarded_floor, iterate
from .halanay import TransferReport, envelope_decay_rate
from .model import CoefficientFn, DelayFn, ProblemSpec, integrate_coefficient
from .reference import DenseSolution, modulus_solution, solve_reference

# Default allowance for reference-solver error when asking whether the bound
# dominates the measurement: measured <= bound*(1+1e-6) + 10*oracle_tol.
ORACLE_TOL = 1e-8


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    horizon: float
    value: float
    method: str  # "analytic" | "grid-scan"


def modulus_delay(r: DelayFn, delta: float, horizon: float, method: str = "auto") -> ModulusEstimate:
    """Upper estimate of sup{|r(t2)-r(t1)| : 0 <= t1,t2 <= horizon, |t2-t1| <= delta}.

    The analytic route uses the family's known Lipschitz constant and range
    (valid for every horizon); the grid scan samples at spacing delta/100.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if method in ("auto", "analytic"):
        return ModulusEstimate(delta, horizon, r.modulus(delta), "analytic")
    if method != "grid":
        raise ValueError(f"method must be 'auto', 'analytic' or 'grid', got {method!r}")
    spacing = delta / 100.0
    n = int(math.ceil(horizon / spacing)) + 1
    ts = np.arange(n) * spacing
    vals = np.array([r.value(float(t)) for t in ts])
    window = int(math.ceil(delta / spacing - 1e-12)) + 1
    if window >= len(vals):
        value = float(vals.max() - vals.min())
    else:
        sw = np.lib.stride_tricks.sliding_window_view(vals, window)
        value = float((sw.max(axis=1) - sw.min(axis=1)).max())
    return ModulusEstimate(delta, horizon, value, "grid-scan")


def error_bound_compact(spec: ProblemSpec, step: StepSize, horizon: float,
                        sol: DenseSolution) -> float:
    """exp(A)*A*w_x(w_r(h)+2h) with A the coefficient integral over [0, horizon]."""
    if sol.horizon < horizon * (1 - 1e-12):
        raise ValueError(f"oracle horizon {sol.horizon} is shorter than {horizon}")
    A = integrate_coefficient(spec.a, 0.0, horizon)
    if A == 0.0:
        return 0.0
    w_r = modulus_delay(spec.r, step.h, horizon).value
    w_x = modulus_solution(sol, w_r + 2.0 * step.h, horizon)
    return math.exp(A) * A * w_x


@dataclass(frozen=True)
class ErrorReport:
    """Measured scheme error against the oracle, with the dominating bound."""

    step: StepSize
    horizon: float
    measured_max_error: float
    bound: float
    dominated: bool
    oracle_tol: float
    grid_errors: tuple[tuple[int, float, float], ...]  # (n, t, |x - z|) at grid points


def measured_error(sol: DenseSolution, ext: PcaExtension, horizon: float,
                   probes_per_step: int = 10, oracle_tol: float = ORACLE_TOL) -> ErrorReport:
    """Sup error over a probe grid with spacing <= h/probes_per_step."""
    if probes_per_step < 10:
        raise ValueError(f"need at least 10 probes per step, got {probes_per_step}")
    if sol.horizon < horizon * (1 - 1e-12) or ext.horizon < horizon * (1 - 1e-12):
        raise ValueError(
            f"horizon {horizon} is not covered (oracle {sol.horizon}, extension {ext.horizon})"
        )
    traj = ext.trajectory
    h = traj.step.h
    n_cells = int(math.ceil(horizon / h - 1e-9))
    probes = np.linspace(0.0, horizon, n_cells * probes_per_step + 1)
    worst = 0.0
    for t in probes:
        worst = max(worst, abs(sol.eval(float(t)) - ext(float(t))))
    grid = []
    for n in range(0, n_cells + 1):
        t = n * h
        if t > horizon * (1 + 1e-12):
            break
        grid.append((n, t, abs(sol.eval(min(t, sol.horizon)) - traj.value(n))))
    bound = error_bound_compact(traj.spec, traj.step, horizon, sol)
    dominated = bool(worst <= bound * (1 + 1e-6) + 10.0 * oracle_tol)
    return ErrorReport(traj.step, horizon, worst, bound, dominated, oracle_tol, tuple(grid))


@dataclass(frozen=True)
class ConvergenceRow:
    k: int
    h: float
    measured: float
    bound: float
    ratio_prev: float | None  # previous measured / this measured


def convergence_study(spec: ProblemSpec, horizon: float, k_list: list[int],
                      fine_step: float | None = None, probes_per_step: int = 10,
                      check: bool = True) -> list[ConvergenceRow]:
    """Measured error and bound per k; verifies decrease and bound domination.

    With check=True (default) raises if the measured errors are not strictly
    decreasing from the second row on (exact zeros allowed) or if any bound
    fails to dominate its measurement.
    """
    if list(k_list) != sorted(k_list) or len(set(k_list)) != len(k_list):
        raise ValueError("k_list must be strictly ascending")
    if fine_step is None:
        fine_step = spec.q / 256.0
    sol = None
    rows: list[ConvergenceRow] = []
    for k in k_list:
        step = StepSize(spec.q, k)
        n_steps = int(math.ceil(horizon / step.h - 1e-9))
        traj = iterate(spec, step, n_steps)
        if sol is None:
            sol = solve_reference(spec, horizon, fine_step)
        report = measured_error(sol, PcaExtension(traj), horizon, probes_per_step)
        ratio = rows[-1].measured / report.measured_max_error if rows and report.measured_max_error > 0 else None
        rows.append(ConvergenceRow(k, step.h, report.measured_max_error, report.bound, ratio))
        if check and not report.dominated:
            raise RuntimeError(
                f"bound {report.bound:.6g} does not dominate measured error "
                f"{report.measured_max_error:.6g} at k={k}"
            )
    if check:
        for prev, cur in zip(rows[1:], rows[2:]):
            if cur.measured >= prev.measured and not (cur.measured == prev.measured == 0.0):
                raise RuntimeError(
                    f"measured error fails to decrease: k={prev.k} gives {prev.measured:.6g}, "
                    f"k={cur.k} gives {cur.measured:.6g}"
                )
    return rows


def convergence_csv(rows: list[ConvergenceRow]) -> str:
    lines = ["k,h,measured_max_error,bound,ratio_prev"]
    for row in rows:
        ratio = f"{row.ratio_prev:.17g}" if row.ratio_prev is not None else ""
        lines.append(f"{row.k},{row.h:.17g},{row.measured:.17g},{row.bound:.17g},{ratio}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# stability checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class YorkeVerdict:
    alpha: float
    q: float
    alpha_q: float
    verdict: str  # "satisfied" | "violated" | "inconclusive"

    def to_json(self) -> str:
        obj = {"alpha": self.alpha, "q": self.q, "alpha_q": self.alpha_q,
               "verdict": self.verdict}
        return json.dumps(obj, indent=2) + "\n"


def yorke_check(a: CoefficientFn, q: float, samples: int = 1000) -> YorkeVerdict:
    """Sufficient stability criterion: 0 < a(t) <= alpha with alpha*q < 3/2.

    alpha is the declared (or computed) coefficient bound.  The criterion is
    only sufficient, so a failed positivity spot-check yields "inconclusive",
    not "violated"; "violated" means alpha*q >= 3/2, i.e. the criterion itself
    cannot apply at this bound.
    """
    alpha = a.bound()
    alpha_q = alpha * q
    if alpha_q >= 1.5:
        verdict = "violated"
    else:
        positive = all(a.value(float(t)) > 0.0 for t in np.linspace(0.0, 10.0 * q, samples))
        verdict = "satisfied" if (positive and alpha_q > 0.0) else "inconclusive"
    return YorkeVerdict(alpha, q, alpha_q, verdict)


def fit_decay_rate(traj: DiscreteTrajectory, t_start: float):
    """Peak-envelope decay rate of |z(n)| for n*h >= t_start; (rate, residual)."""
    if traj.horizon <= t_start:
        raise ValueError(f"trajectory ends at {traj.horizon}, before t_start={t_start}")
    k = traj.step.k
    times = np.arange(traj.n_steps + 1) * traj.step.h
    return envelope_decay_rate(times, traj.values[k:], t_start)


@dataclass(frozen=True)
class TransferSplit:
    """Triangle-inequality split of |x(t) - z(floor(t/h))| into its three pieces:
    solution drift to the grid point, restart-error envelope, and the
    perturbation-driven envelope term."""

    continuity_term: float
    restart_term: float
    drive_term: float
    actual: float

    @property
    def total(self) -> float:
        return self.continuity_term + self.restart_term + self.drive_term


def transfer_split(sol: DenseSolution, traj: DiscreteTrajectory, report: TransferReport,
                   E_norm: float, phi_norm: float, t: float) -> TransferSplit:
    if not report.admissible:
        raise RuntimeError("inadmissible step has no decay envelope")
    h = traj.step.h
    n = min(guarded_floor(t / h), traj.n_steps)
    t_grid = n * h
    if t_grid < report.t0:
        raise ValueError(f"split needs floor(t/h)*h >= t0={report.t0}, got {t_grid}")
    tc = report.constants
    decay = math.exp(-report.eta * (t_grid - report.t0))
    continuity = abs(sol.eval(t) - sol.eval(t_grid))
    restart = tc.K * E_norm * decay
    drive = report.K1 * report.M1 * phi_norm * math.exp(tc.sigma * report.t0) * t_grid * decay
    actual = abs(sol.eval(t) - traj.value(n))
    return TransferSplit(continuity, restart, drive, actual)
