"""High-accuracy reference solution of x'(t) = -a(t) x(t - r(t)) by the method of steps.

Fixed-step fourth-order marching with cubic-Hermite dense output of the stored
past.  Delayed lookups never read ahead of the marching front: a lookup that
lands inside the step currently being integrated (possible only when the delay
drops below the step size) extrapolates the last completed Hermite segment,
which costs O(fine_step^2) locally and is measured, not assumed, by the
self-convergence tests.  Fixed step and hand-rolled interpolation keep the
oracle deterministic across platforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericOverflowError
from .model import ProblemSpec

# Node hits inside the solver are snapped within this fraction of a step, so a
# delayed argument that lands exactly on a known node never needs a derivative
# that has not been computed yet.
_NODE_SNAP = 1e-9


def _hermite(theta: float, dt: float, x0: float, x1: float, m0: float, m1: float) -> float:
    # Horner difference form: exact at theta = 0 and bitwise-constant on
    # constant data, which keeps zero-coefficient problems exactly frozen.
    d = x1 - x0
    c2 = 3.0 * d - dt * (2.0 * m0 + m1)
    c3 = -2.0 * d + dt * (m0 + m1)
    return x0 + theta * (dt * m0 + theta * (c2 + theta * c3))


@dataclass(frozen=True)
class DenseSolution:
    """Evaluable approximation of x on [t_start - q, t_start + n*fine_step].

    On [t_start - q, t_start] evaluation delegates to the supplied history
    (exact, no interpolation); beyond t_start it is cubic Hermite between the
    stored nodes.
    """

    spec: ProblemSpec
    fine_step: float
    t_start: float
    values: np.ndarray
    derivs: np.ndarray
    history: Callable[[float], float]

    @property
    def horizon(self) -> float:
        return self.t_start + (len(self.values) - 1) * self.fine_step

    def node_times(self) -> np.ndarray:
        return self.t_start + np.arange(len(self.values)) * self.fine_step

    def eval(self, t: float) -> float:
        lo = self.t_start - self.spec.q
        hi = self.horizon
        if t < lo - 1e-9 or t > hi * (1 + 1e-12) + 1e-12:
            raise ValueError(f"solution is defined on [{lo}, {hi}], got t={t}")
        if t <= self.t_start:
            return float(self.history(t))
        if t >= hi:
            return float(self.values[-1])
        dt = self.fine_step
        j = min(int((t - self.t_start) / dt), len(self.values) - 2)
        theta = (t - self.t_start - j * dt) / dt
        return float(_hermite(theta, dt, self.values[j], self.values[j + 1],
                              self.derivs[j], self.derivs[j + 1]))


def _march(spec: ProblemSpec, t_start: float, history: Callable[[float], float],
           t_end: float, fine_step: float) -> DenseSolution:
    a, r = spec.a, spec.r
    dt = fine_step
    n_steps = int(math.ceil((t_end - t_start) / dt - 1e-9))
    if n_steps < 1:
        raise ValueError(f"horizon {t_end} leaves no step after t_start={t_start}")
    # NaN fill makes any read of a not-yet-computed slot loud instead of silent.
    xs = np.full(n_steps + 1, math.nan)
    ms = np.full(n_steps + 1, math.nan)
    xs[0] = history(t_start)

    def past(t: float, nodes_done: int, segs_done: int) -> float:
        """Stored-past evaluation valid while marching.

        nodes_done: highest node index whose value is known.
        segs_done:  highest count of segments whose *derivatives* are known,
                    i.e. Hermite evaluation is allowed on segments 0..segs_done-1.
        """
        if t <= t_start:
            return history(max(t, t_start - spec.q))
        s = (t - t_start) / dt
        near = round(s)
        if abs(s - near) <= _NODE_SNAP and near <= nodes_done:
            return float(xs[int(near)])
        j = int(s)
        if j >= segs_done:
            if segs_done == 0:
                # Before the first segment is complete: linear from the start node.
                return float(xs[0] + (t - t_start) * ms[0])
            j = segs_done - 1
        theta = (t - t_start - j * dt) / dt
        return _hermite(theta, dt, xs[j], xs[j + 1], ms[j], ms[j + 1])

    def rhs(t: float, nodes_done: int, segs_done: int) -> float:
        return -a.value(t) * past(t - r.value(t), nodes_done, segs_done)

    ms[0] = rhs(t_start, 0, 0)
    for j in range(n_steps):
        t = t_start + j * dt
        k1 = rhs(t, j, j)
        k2 = rhs(t + dt / 2.0, j, j)
        k3 = k2  # the right-hand side does not read the running state
        k4 = rhs(t + dt, j, j)
        xs[j + 1] = xs[j] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(xs[j + 1]):
            raise NumericOverflowError(f"non-finite state at t={t + dt}")
        # Node j+1 is now known but its derivative is not: segs_done stays j.
        ms[j + 1] = rhs(t + dt, j + 1, j)

    # Derivatives of nodes whose delayed argument fell inside the then-incomplete
    # step were extrapolated; settle them against the finished table so that every
    # stored derivative collocates the equation on the dense output.  The update
    # contracts with factor O(a0*dt), so a few sweeps reach machine level.
    def eval_full(t: float) -> float:
        if t <= t_start:
            return history(max(t, t_start - spec.q))
        j = min(int((t - t_start) / dt), n_steps - 1)
        theta = (t - t_start - j * dt) / dt
        return _hermite(theta, dt, xs[j], xs[j + 1], ms[j], ms[j + 1])

    node_ts = t_start + np.arange(n_steps + 1) * dt
    for _ in range(8):
        new_ms = np.array([-a.value(float(t)) * eval_full(float(t) - r.value(float(t)))
                           for t in node_ts])
        change = float(np.max(np.abs(new_ms - ms)))
        ms[:] = new_ms
        if change <= 1e-13 * max(1.0, float(np.max(np.abs(ms)))):
            break

    return DenseSolution(spec, dt, t_start, xs, ms, history)


def solve_reference(spec: ProblemSpec, horizon: float, fine_step: float) -> DenseSolution:
    """Reference solution on [0, horizon] (rounded up to a whole step)."""
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not 0 < fine_step <= spec.q / 16.0:
        raise ValueError(f"fine_step must lie in (0, q/16={spec.q / 16}], got {fine_step}")
    spec.spot_check()
    return _march(spec, 0.0, spec.phi.value, horizon, fine_step)


def modulus_solution(sol: DenseSolution, delta: float, horizon: float) -> float:
    """Upper estimate of sup{|x(t2)-x(t1)| : |t2-t1| <= delta} over [t_start-q, horizon].

    Grid scan at the solver resolution with the pair window rounded up to whole
    cells, so the estimate errs on the large side at that resolution.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if horizon > sol.horizon * (1 + 1e-12) + 1e-12:
        raise ValueError(f"horizon {horizon} exceeds solution horizon {sol.horizon}")
    dt = sol.fine_step
    q = sol.spec.q
    n_hist = int(math.ceil(q / dt - 1e-9))
    hist_ts = sol.t_start - q + np.arange(n_hist) * (q / n_hist)
    hist_vals = np.array([sol.history(float(t)) for t in hist_ts])
    j_hi = min(int(math.ceil((horizon - sol.t_start) / dt - 1e-9)), len(sol.values) - 1)
    samples = np.concatenate([hist_vals, sol.values[: j_hi + 1]])
    window = int(math.ceil(delta / dt - 1e-12)) + 1
    if window >= len(samples):
        return float(samples.max() - samples.min())
    sw = np.lib.stride_tricks.sliding_window_view(samples, window)
    return float((sw.max(axis=1) - sw.min(axis=1)).max())


def solution_csv(sol: DenseSolution) -> str:
    """CSV with columns t, x over [t_start - q, horizon]."""
    lines = ["t,x"]
    dt = sol.fine_step
    q = sol.spec.q
    n_hist = int(math.ceil(q / dt - 1e-9))
    for j in range(n_hist):
        t = sol.t_start - q + j * (q / n_hist)
        lines.append(f"{t:.17g},{sol.history(float(t)):.17g}")
    for j in range(len(sol.values)):
        t = sol.t_start + j * dt
        lines.append(f"{t:.17g},{sol.values[j]:.17g}")
    return "\n".join(lines) + "\n"


def write_solution_csv(sol: DenseSolution, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(solution_csv(sol))
