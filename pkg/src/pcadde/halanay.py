"""Decay-rate root equation and stability-transfer constants.

The decay exponent of the delay inequality is the unique positive root of
eta = alpha - beta * exp(eta * q) for alpha > beta > 0.  For the discrete
scheme the same equation is used with alpha = sigma (continuous decay rate)
and beta = K1(h) = a0^2 * (2h + w_r(h)) * K, which shrinks to zero with h, so
every sufficiently fine grid is admissible (sigma > K1(h)) and inherits an
exponential envelope.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .discretizer import StepSize
from .errors import FitError
from .model import HistoryFn, ProblemSpec, history_norm
from .reference import DenseSolution, _march, solve_reference

ETA_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class HalanayProblem:
    """Root-equation data (alpha, beta, q); requires alpha > beta > 0, q >= 0."""

    alpha: float
    beta: float
    q: float

    def __post_init__(self):
        if not (self.alpha > self.beta > 0.0):
            raise ValueError(f"need alpha > beta > 0, got alpha={self.alpha}, beta={self.beta}")
        if not self.q >= 0.0:
            raise ValueError(f"need q >= 0, got {self.q}")


def solve_eta(p: HalanayProblem) -> float:
    """Unique positive root of eta = alpha - beta*exp(eta*q), by bisection.

    f(eta) = eta - alpha + beta*exp(eta*q) is strictly increasing with
    f(0) = beta - alpha < 0 and f(alpha - beta) >= 0, so [0, alpha - beta]
    brackets the root.  Bisection (not Newton) for a guaranteed bracket and
    bit-identical results across platforms.
    """
    alpha, beta, q = p.alpha, p.beta, p.q

    def f(eta: float) -> float:
        return eta - alpha + beta * math.exp(eta * q)

    lo, hi = 0.0, alpha - beta
    if q > 0.0:
        # beta*exp(eta*q) = alpha - eta < alpha at the root, so eta < ln(alpha/beta)/q;
        # this also keeps exp() in range when alpha - beta is enormous.
        hi = min(hi, math.log(alpha / beta) / q)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    eta = min((lo, hi), key=lambda e: abs(f(e)))
    # For alpha of order one the residual lands well under 1e-12; for huge
    # alpha the attainable residual scales with alpha * machine epsilon.
    if abs(f(eta)) > ETA_RESIDUAL_TOL * max(1.0, alpha):
        raise ArithmeticError(
            f"bisection stalled at residual {abs(f(eta)):.3e} for {p}"
        )
    return eta


def k1_of_h(a0: float, step: StepSize, w_r_h: float, K: float) -> float:
    """Perturbation constant a0^2 * (2h + w_r(h)) * K of the discrete scheme."""
    if a0 < 0 or w_r_h < 0 or not K > 0:
        raise ValueError("need a0 >= 0, w_r_h >= 0, K > 0")
    return a0 * a0 * (2.0 * step.h + w_r_h) * K


@dataclass(frozen=True)
class TransferConstants:
    """Exponential-bound constants: |x(t)| <= M0*||phi||*exp(-sigma*t) and the
    restarted-solution bound with factor K.  Either user-supplied from analytic
    knowledge or empirically fitted (then residual records the fit quality)."""

    K: float
    sigma: float
    M0: float
    source: str = "user"
    residual: float | None = None

    def __post_init__(self):
        if not (self.K > 0 and self.sigma > 0 and self.M0 > 0):
            raise ValueError("K, sigma, M0 must all be positive")
        if self.source not in ("user", "fitted"):
            raise ValueError(f"source must be 'user' or 'fitted', got {self.source!r}")

    def to_json(self) -> str:
        obj = {"K": self.K, "sigma": self.sigma, "M0": self.M0,
               "source": self.source, "residual": self.residual}
        return json.dumps(obj, indent=2) + "\n"


def constants_from_dict(obj: dict) -> TransferConstants:
    allowed = {"K", "sigma", "M0", "source", "residual"}
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown keys in constants file: {sorted(unknown)}")
    for key in ("K", "sigma", "M0", "source"):
        if key not in obj:
            raise ValueError(f"constants file is missing {key!r}")
    return TransferConstants(obj["K"], obj["sigma"], obj["M0"], obj["source"],
                             obj.get("residual"))


def load_constants(path) -> TransferConstants:
    with open(path, "r", encoding="utf-8") as fh:
        return constants_from_dict(json.load(fh))


@dataclass(frozen=True)
class SweepRow:
    k: int
    h: float
    K1: float
    admissible: bool
    eta: float | None
    degenerate: bool = False


def admissible_steps(spec: ProblemSpec, tc: TransferConstants, k_max: int) -> list[SweepRow]:
    """Admissibility table for k = 1..k_max (h = q/k): sigma > K1(h) and its eta."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    a0 = spec.a.bound()
    q = spec.q
    rows = []
    for k in range(1, k_max + 1):
        step = StepSize(q, k)
        K1 = k1_of_h(a0, step, spec.r.modulus(step.h), tc.K)
        if K1 == 0.0:
            # Zero coefficient: the root equation needs beta > 0, but the limit
            # is forced to eta = sigma; report it and mark the row degenerate.
            rows.append(SweepRow(k, step.h, K1, True, tc.sigma, degenerate=True))
        elif tc.sigma > K1:
            eta = solve_eta(HalanayProblem(tc.sigma, K1, q))
            rows.append(SweepRow(k, step.h, K1, True, eta))
        else:
            rows.append(SweepRow(k, step.h, K1, False, None))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["k,h,K1,admissible,eta"]
    for row in rows:
        eta = f"{row.eta:.17g}" if row.eta is not None else ""
        lines.append(f"{row.k},{row.h:.17g},{row.K1:.17g},{str(row.admissible).lower()},{eta}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TransferReport:
    """Admissibility verdict for one step size plus the envelope constants.

    The decay envelope, valid for t >= t0 once the step is admissible, is
    (K*||E||_q + K1*M1*||phi||_q*exp(sigma*t0)*t) * exp(-eta*(t - t0)).
    """

    step: StepSize
    constants: TransferConstants
    K1: float
    admissible: bool
    eta: float | None
    t0: float
    M1: float
    degenerate: bool = False


def build_transfer_report(spec: ProblemSpec, tc: TransferConstants, step: StepSize) -> TransferReport:
    q = spec.q
    w_r_q = spec.r.modulus(q)
    K1 = k1_of_h(spec.a.bound(), step, spec.r.modulus(step.h), tc.K)
    t0 = 3.0 * q + w_r_q
    M1 = tc.M0 * math.exp(tc.sigma * (5.0 * q + 2.0 * w_r_q))
    if K1 == 0.0:
        return TransferReport(step, tc, K1, True, tc.sigma, t0, M1, degenerate=True)
    if tc.sigma > K1:
        eta = solve_eta(HalanayProblem(tc.sigma, K1, q))
        return TransferReport(step, tc, K1, True, eta, t0, M1)
    return TransferReport(step, tc, K1, False, None, t0, M1)


def envelope(report: TransferReport, E_norm: float, phi_norm: float, t: float) -> float:
    """Decay envelope at time t >= t0 for an admissible step."""
    if not report.admissible:
        raise RuntimeError("inadmissible step has no decay envelope")
    if t < report.t0:
        raise ValueError(f"envelope is defined for t >= t0={report.t0}, got t={t}")
    tc = report.constants
    amplitude = (tc.K * E_norm
                 + report.K1 * report.M1 * phi_norm * math.exp(tc.sigma * report.t0) * t)
    return amplitude * math.exp(-report.eta * (t - report.t0))


# ---------------------------------------------------------------------------
# empirical constants
# ---------------------------------------------------------------------------


def envelope_decay_rate(times, values, t_start: float, floor_rel: float = 1e-12):
    """Least-squares decay rate of the peak envelope of |values| past t_start.

    Fits log of the local peaks of |values| (or the first/last usable samples
    when the signal is monotone) against time; samples below floor_rel times
    the maximum are ignored so double-precision dust cannot flatten the fit.
    Returns (rate, rms_residual); positive rate means decay.
    """
    times = np.asarray(times, dtype=float)
    mags = np.abs(np.asarray(values, dtype=float))
    if len(times) != len(mags) or len(times) < 2:
        raise ValueError("times and values must be equal-length with >= 2 samples")
    top = mags.max()
    if top == 0.0:
        raise FitError("all samples are zero; no envelope to fit")
    floor = top * floor_rel
    usable = (mags > floor) & (times >= t_start)
    peaks = [i for i in range(1, len(mags) - 1)
             if usable[i] and mags[i] >= mags[i - 1] and mags[i] >= mags[i + 1]]
    if len(peaks) < 2:
        idx = np.nonzero(usable)[0]
        if len(idx) < 2:
            raise FitError("fewer than two usable samples past t_start")
        peaks = [int(idx[0]), int(idx[-1])]
    tt = times[peaks]
    vv = np.log(mags[peaks])
    slope, intercept = np.polyfit(tt, vv, 1)
    residual = float(np.sqrt(np.mean((slope * tt + intercept - vv) ** 2)))
    return float(-slope), residual


def fit_transfer_constants(sol: DenseSolution, trials: list[HistoryFn],
                           t_fit: float | None = None,
                           restart_times: tuple[float, ...] | None = None) -> TransferConstants:
    """Empirical (K, sigma, M0) from decaying trial solutions.

    sigma is the smallest peak-envelope decay rate over the trials; M0 and K
    are the smallest constants making the exponential bounds hold on the
    sampled data, with K measured on restarted solutions (marching again from
    time s with history read off the already-computed solution).  The fitted
    constants drive the admissibility sweep; they carry no analytic guarantee
    and are labelled as fitted.
    """
    spec, T, fs = sol.spec, sol.horizon, sol.fine_step
    q = spec.q
    if t_fit is None:
        t_fit = 2.0 * q
    if restart_times is None:
        restart_times = tuple(s for s in (q, 2.0 * q, 4.0 * q) if s < T / 2.0)
        if not restart_times:
            raise ValueError(f"horizon {T} is too short to place restart experiments")

    kept: list[tuple[HistoryFn, float, DenseSolution]] = []
    rates, residuals = [], []
    for idx, phi in enumerate(trials):
        norm = history_norm(phi)
        if norm == 0.0:
            continue  # zero history gives the zero solution; nothing to fit
        trial_sol = solve_reference(replace(spec, phi=phi), T, fs)
        try:
            rate, res = envelope_decay_rate(trial_sol.node_times(), trial_sol.values, t_fit)
        except FitError as exc:
            raise FitError(f"trial {idx} ({phi!r}): {exc}") from exc
        if rate <= 0.0:
            raise FitError(f"trial {idx} ({phi!r}) does not decay (rate {rate:.3g})")
        kept.append((phi, norm, trial_sol))
        rates.append(rate)
        residuals.append(res)
    if not kept:
        raise FitError("no usable (non-zero) trial histories")

    sigma = min(rates)

    # Smallest M0 with |x(t)| <= M0 * ||phi|| * exp(-sigma t) on the samples.
    M0 = 0.0
    for phi, norm, trial_sol in kept:
        ts = trial_sol.node_times()
        mags = np.abs(trial_sol.values)
        mask = mags > mags.max() * 1e-12
        M0 = max(M0, float((mags[mask] / (norm * np.exp(-sigma * ts[mask]))).max()))

    # Smallest K with |u(t)| <= K * ||u_s||_q * exp(-sigma (t-s)) over restarts.
    K = 0.0
    phi0, _, base = kept[0]
    base_spec = replace(spec, phi=phi0)
    for s in restart_times:
        restarted = _march(base_spec, s, base.eval, T, fs)
        seg_ts = np.linspace(s - q, s, int(math.ceil(q / fs)) + 1)
        seg_norm = max(abs(base.eval(float(t))) for t in seg_ts)
        if seg_norm == 0.0:
            continue
        ts = restarted.node_times()
        mags = np.abs(restarted.values)
        mask = mags > np.abs(base.values).max() * 1e-12
        if mask.any():
            K = max(K, float((mags[mask] / (seg_norm * np.exp(-sigma * (ts[mask] - s)))).max()))
    if K == 0.0:
        raise FitError("restart experiments produced no usable samples")

    return TransferConstants(K, sigma, M0, source="fitted", residual=max(residuals))
