"""Piecewise-constant-argument discretization of x'(t) = -a(t) x(t - r(t)).

With step h = q/k the delayed argument is snapped to the grid through the
integer offset k_i = floor(r(ih)/h), giving the snapped argument
gamma_h(t) = h*(i - k_i) for t in [ih, (i+1)h).  Integrating over one cell
turns the snapped equation into the linear difference recurrence

    z(n+1) = z(n) - A_n * z(n - k_n),      A_n = integral of a over [nh, (n+1)h],

with z(n) = phi(nh) for n = -k..0, and a continuous extension between grid
points given by the partial-cell integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericOverflowError
from .model import DelayFn, ProblemSpec, integrate_coefficient

# floor() guard: ratios that sit within this distance below an integer are
# rounded up to it, so exact values like |cos 0| / 0.5 = 2 cannot flip to 1
# through platform-dependent rounding noise.
FLOOR_GUARD = 1e-12


def guarded_floor(x: float) -> int:
    return int(math.floor(x + FLOOR_GUARD))


@dataclass(frozen=True)
class StepSize:
    """Grid step h = q/k.  Always constructed from (q, k), never from a raw h."""

    q: float
    k: int
    h: float = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError(f"q must be a positive real, got {self.q!r}")
        object.__setattr__(self, "h", self.q / self.k)


def delay_index(i: int, step: StepSize, r: DelayFn) -> int:
    """k_i = floor(r(ih)/h), the delay measured in whole grid steps at cell i."""
    ki = guarded_floor(r.value(i * step.h) / step.h)
    if ki < 0 or ki > step.k:
        raise ValueError(
            f"delay at t={i * step.h} leaves [0, q]; got k_i={ki} with k={step.k}"
        )
    return ki


def gamma_h(t: float, step: StepSize, r: DelayFn) -> float:
    """Grid-snapped delayed argument h*(i - k_i) for t in cell i = floor(t/h)."""
    if t < 0:
        raise ValueError(f"gamma_h is defined for t >= 0, got t={t}")
    i = guarded_floor(t / step.h)
    return step.h * (i - delay_index(i, step, r))


@dataclass(frozen=True)
class DiscreteTrajectory:
    """Grid states z(n) for n = -k..N plus the per-step data that produced them.

    coeff_integrals[n] and delay_indices[n] hold A_n and k_n for n = 0..N-1;
    storing them alongside the states makes runs reproducible and inspectable
    without re-integration.
    """

    step: StepSize
    values: np.ndarray
    coeff_integrals: np.ndarray
    delay_indices: np.ndarray
    spec: ProblemSpec

    @property
    def n_steps(self) -> int:
        return len(self.values) - self.step.k - 1

    @property
    def horizon(self) -> float:
        return self.n_steps * self.step.h

    def value(self, n: int) -> float:
        if n < -self.step.k or n > self.n_steps:
            raise ValueError(f"grid index {n} outside [-k={-self.step.k}, N={self.n_steps}]")
        return float(self.values[n + self.step.k])

    def grid_indices(self) -> np.ndarray:
        return np.arange(-self.step.k, self.n_steps + 1)

    def grid_times(self) -> np.ndarray:
        return self.grid_indices() * self.step.h


def iterate(spec: ProblemSpec, step: StepSize, n_steps: int) -> DiscreteTrajectory:
    """Run the difference recurrence for n_steps grid steps."""
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    if abs(step.q - spec.q) > 1e-12 * max(1.0, spec.q):
        raise ValueError(f"step was built for q={step.q}, problem has q={spec.q}")
    spec.spot_check()

    k, h = step.k, step.h
    values = np.empty(n_steps + k + 1)
    for n in range(-k, 1):
        values[n + k] = spec.phi.value(n * h)
    coeff_integrals = np.empty(n_steps)
    delay_indices = np.empty(n_steps, dtype=int)

    for n in range(n_steps):
        kn = delay_index(n, step, spec.r)
        an = integrate_coefficient(spec.a, n * h, (n + 1) * h)
        # kn <= k and n >= 0 imply n - kn >= -k; assert anyway as a cheap guard
        # against a delay that escapes its declared bound between grid checks.
        if n - kn < -k:
            raise ValueError(f"delayed index n-k_n={n - kn} reaches before -k at step {n}")
        nxt = float(values[n + k]) - an * float(values[n - kn + k])
        if not math.isfinite(nxt):
            raise NumericOverflowError(f"non-finite state at step {n + 1}")
        values[n + 1 + k] = nxt
        coeff_integrals[n] = an
        delay_indices[n] = kn

    return DiscreteTrajectory(step, values, coeff_integrals, delay_indices, spec)


def extend(traj: DiscreteTrajectory, t: float) -> float:
    """Continuous extension z_h(t) = z(n) - (integral of a over [nh, t]) * z(n - k_n).

    Exactly reproduces the stored grid values at t = nh (no quadrature there).
    """
    h, k, n_max = traj.step.h, traj.step.k, traj.n_steps
    horizon = traj.horizon
    if t < 0 or t > horizon * (1 + 1e-12) + 1e-12:
        raise ValueError(f"extension is defined on [0, {horizon}], got t={t}")
    n = guarded_floor(t / h)
    if n >= n_max:
        return float(traj.values[n_max + k])
    if n * h >= t:
        # On (or within rounding of) a grid point.
        return float(traj.values[n + k])
    kn = int(traj.delay_indices[n])
    partial = integrate_coefficient(traj.spec.a, n * h, t)
    return float(traj.values[n + k] - partial * traj.values[n - kn + k])


@dataclass(frozen=True)
class PcaExtension:
    """Callable continuous extension of a trajectory on [0, N*h]."""

    trajectory: DiscreteTrajectory

    @property
    def horizon(self) -> float:
        return self.trajectory.horizon

    def __call__(self, t: float) -> float:
        return extend(self.trajectory, t)


def trajectory_csv(traj: DiscreteTrajectory) -> str:
    """CSV with columns n, t, z, A_n, k_n (A_n/k_n blank where undefined)."""
    lines = ["n,t,z,A_n,k_n"]
    k = traj.step.k
    for n in traj.grid_indices():
        z = traj.values[n + k]
        if 0 <= n < traj.n_steps:
            an = f"{traj.coeff_integrals[n]:.17g}"
            kn = str(int(traj.delay_indices[n]))
        else:
            an = kn = ""
        lines.append(f"{n},{n * traj.step.h:.17g},{z:.17g},{an},{kn}")
    return "\n".join(lines) + "\n"


def write_trajectory_csv(traj: DiscreteTrajectory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trajectory_csv(traj))
