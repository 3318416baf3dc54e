"""Problem vocabulary for x'(t) = -a(t) x(t - r(t)) with history x = phi on [-q, 0].

Coefficients, delays, and histories are restricted to closed, serializable
families so that integrals, sup-norms, bounds, and continuity moduli are exact
(or cheaply certified) instead of estimated.  All values are immutable after
construction and safe to share between threads.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field

import numpy as np

Samples = tuple[tuple[float, float], ...]

# Range invariants are spot-checked on a grid of this many cells over [0, 10q];
# exactness is not claimed, the check catches misdeclared problems cheaply.
SPOT_CHECK_CELLS = 10_000
_EVAL_SLACK = 1e-9


def _as_samples(points) -> Samples:
    pts = tuple((float(t), float(v)) for t, v in points)
    if len(pts) < 2:
        raise ValueError("tabulated function needs at least two sample points")
    for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
        if not t1 > t0:
            raise ValueError("tabulated sample times must be strictly increasing")
    for t, v in pts:
        if not (math.isfinite(t) and math.isfinite(v)):
            raise ValueError("tabulated samples must be finite")
    return pts


def _interp(samples: Samples, t: float) -> float:
    """Piecewise-linear value at t, held constant beyond the sampled span."""
    xs = [p[0] for p in samples]
    if t <= xs[0]:
        return samples[0][1]
    if t >= xs[-1]:
        return samples[-1][1]
    i = bisect.bisect_right(xs, t) - 1
    t0, v0 = samples[i]
    t1, v1 = samples[i + 1]
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


def _trapezoid_between(samples: Samples, t1: float, t2: float) -> float:
    """Exact integral of the piecewise-linear function over [t1, t2]."""
    if t2 <= t1:
        return 0.0
    knots = [t1] + [t for t, _ in samples if t1 < t < t2] + [t2]
    total = 0.0
    for a, b in zip(knots, knots[1:]):
        total += 0.5 * (_interp(samples, a) + _interp(samples, b)) * (b - a)
    return total


# ---------------------------------------------------------------------------
# coefficient a(t)
# ---------------------------------------------------------------------------


class CoefficientFn:
    """Coefficient a(t), t >= 0.  Subclasses evaluate and integrate exactly."""

    declared_bound: float | None

    def value(self, t: float) -> float:
        raise NotImplementedError

    def integral(self, t1: float, t2: float) -> float:
        raise NotImplementedError

    def computed_bound(self) -> float:
        """sup |a(t)| over t >= 0, from the family's structure."""
        raise NotImplementedError

    def bound(self) -> float:
        """a0 used by the stability analysis: declared if given, else computed."""
        if self.declared_bound is not None:
            return self.declared_bound
        return self.computed_bound()


@dataclass(frozen=True)
class ConstantCoefficient(CoefficientFn):
    c: float
    declared_bound: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise ValueError("constant coefficient must be finite")

    def value(self, t: float) -> float:
        return self.c

    def integral(self, t1: float, t2: float) -> float:
        return self.c * (t2 - t1)

    def computed_bound(self) -> float:
        return abs(self.c)


@dataclass(frozen=True)
class SinusoidalAffineCoefficient(CoefficientFn):
    """a(t) = c0 + c1*sin(omega*t + phase)."""

    c0: float
    c1: float
    omega: float
    phase: float = 0.0
    declared_bound: float | None = None

    def __post_init__(self):
        for v in (self.c0, self.c1, self.omega, self.phase):
            if not math.isfinite(v):
                raise ValueError("sinusoidal-affine parameters must be finite")

    def value(self, t: float) -> float:
        return self.c0 + self.c1 * math.sin(self.omega * t + self.phase)

    def integral(self, t1: float, t2: float) -> float:
        if self.omega == 0.0:
            return (self.c0 + self.c1 * math.sin(self.phase)) * (t2 - t1)
        w = self.omega
        osc = -(self.c1 / w) * (math.cos(w * t2 + self.phase) - math.cos(w * t1 + self.phase))
        return self.c0 * (t2 - t1) + osc

    def computed_bound(self) -> float:
        if self.omega == 0.0:
            return abs(self.c0 + self.c1 * math.sin(self.phase))
        return abs(self.c0) + abs(self.c1)


@dataclass(frozen=True)
class TabulatedCoefficient(CoefficientFn):
    """Piecewise-linear samples, held constant beyond the sampled span."""

    samples: Samples
    declared_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_samples(self.samples))

    def value(self, t: float) -> float:
        return _interp(self.samples, t)

    def integral(self, t1: float, t2: float) -> float:
        return _trapezoid_between(self.samples, t1, t2)

    def computed_bound(self) -> float:
        return max(abs(v) for _, v in self.samples)


def eval_coefficient(a: CoefficientFn, t: float) -> float:
    """a(t) for t >= 0."""
    if t < 0:
        raise ValueError(f"coefficient is defined for t >= 0, got t={t}")
    return a.value(t)


def integrate_coefficient(a: CoefficientFn, t1: float, t2: float) -> float:
    """Exact integral of a over [t1, t2], 0 <= t1 <= t2."""
    if t1 < 0 or t2 < t1:
        raise ValueError(f"need 0 <= t1 <= t2, got [{t1}, {t2}]")
    return a.integral(t1, t2)


# ---------------------------------------------------------------------------
# delay r(t)
# ---------------------------------------------------------------------------


class DelayFn:
    """Delay r(t) in [0, q] for t >= 0, uniformly continuous with known modulus."""

    q: float

    def value(self, t: float) -> float:
        raise NotImplementedError

    def modulus(self, delta: float) -> float:
        """Analytic upper bound on sup{|r(t2)-r(t1)| : |t2-t1| <= delta}."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantDelay(DelayFn):
    r0: float
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("delay bound q must be positive")
        if not 0 <= self.r0 <= self.q:
            raise ValueError(f"constant delay must lie in [0, q={self.q}], got {self.r0}")

    def value(self, t: float) -> float:
        return self.r0

    def modulus(self, delta: float) -> float:
        return 0.0


@dataclass(frozen=True)
class AbsCosineDelay(DelayFn):
    """r(t) = |cos t|; Lipschitz-1 with range [0, 1]."""

    q: float = 1.0

    def __post_init__(self):
        if not self.q >= 1.0:
            raise ValueError("|cos t| has sup 1, so q must be >= 1")

    def value(self, t: float) -> float:
        return abs(math.cos(t))

    def modulus(self, delta: float) -> float:
        return min(delta, 1.0)


@dataclass(frozen=True)
class TabulatedDelay(DelayFn):
    samples: Samples
    q: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_samples(self.samples))
        if not self.q > 0:
            raise ValueError("delay bound q must be positive")
        for t, v in self.samples:
            if not 0 <= v <= self.q:
                raise ValueError(f"delay samples must lie in [0, q={self.q}], got r({t})={v}")

    def value(self, t: float) -> float:
        return _interp(self.samples, t)

    def max_slope(self) -> float:
        return max(
            abs(v1 - v0) / (t1 - t0)
            for (t0, v0), (t1, v1) in zip(self.samples, self.samples[1:])
        )

    def modulus(self, delta: float) -> float:
        values = [v for _, v in self.samples]
        return min(self.max_slope() * delta, max(values) - min(values))


# ---------------------------------------------------------------------------
# history phi on [-q, 0]
# ---------------------------------------------------------------------------


class HistoryFn:
    """Continuous history on [-q, 0] with exactly computable sup-norm."""

    q: float

    def value(self, t: float) -> float:
        raise NotImplementedError

    def sup_norm(self) -> float:
        raise NotImplementedError

    def _check_domain(self, t: float) -> float:
        if t < -self.q - _EVAL_SLACK or t > _EVAL_SLACK:
            raise ValueError(f"history is defined on [{-self.q}, 0], got t={t}")
        return min(max(t, -self.q), 0.0)


@dataclass(frozen=True)
class ConstantHistory(HistoryFn):
    v: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and self.q > 0):
            raise ValueError("constant history needs finite value and q > 0")

    def value(self, t: float) -> float:
        self._check_domain(t)
        return self.v

    def sup_norm(self) -> float:
        return abs(self.v)


@dataclass(frozen=True)
class PolynomialHistory(HistoryFn):
    """phi(t) = sum coeffs[i] * t**i on [-q, 0]."""

    coeffs: tuple[float, ...]
    q: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs or not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("polynomial history needs finite coefficients")
        if not self.q > 0:
            raise ValueError("q must be positive")

    def value(self, t: float) -> float:
        t = self._check_domain(t)
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def sup_norm(self) -> float:
        # |phi| is maximal at an endpoint or at a root of phi'.
        candidates = [-self.q, 0.0]
        deriv = np.polynomial.polynomial.polyder(self.coeffs)
        if np.any(deriv != 0.0):
            for root in np.polynomial.polynomial.polyroots(deriv):
                if abs(root.imag) < 1e-12 and -self.q <= root.real <= 0:
                    candidates.append(float(root.real))
        return max(abs(self.value(t)) for t in candidates)


@dataclass(frozen=True)
class TabulatedHistory(HistoryFn):
    """Piecewise-linear samples spanning [-q, 0]; q is taken from the first node."""

    samples: Samples
    q: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_samples(self.samples))
        if abs(self.samples[-1][0]) > 1e-12:
            raise ValueError("history samples must end at t = 0")
        if self.samples[0][0] >= 0:
            raise ValueError("history samples must start at t = -q < 0")
        object.__setattr__(self, "q", -self.samples[0][0])

    def value(self, t: float) -> float:
        t = self._check_domain(t)
        return _interp(self.samples, t)

    def sup_norm(self) -> float:
        # Piecewise-linear: extreme values occur at nodes.
        return max(abs(v) for _, v in self.samples)


def history_norm(phi: HistoryFn) -> float:
    """sup of |phi| over [-q, 0]."""
    return phi.sup_norm()


# ---------------------------------------------------------------------------
# assembled problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """One delay-equation instance: coefficient, delay, history, and a label."""

    a: CoefficientFn
    r: DelayFn
    phi: HistoryFn
    label: str = ""

    def __post_init__(self):
        if not self.r.q > 0:
            raise ValueError("delay bound q must be positive")
        if abs(self.phi.q - self.r.q) > 1e-12 * max(1.0, self.r.q):
            raise ValueError(
                f"history domain [-{self.phi.q}, 0] does not match delay bound q={self.r.q}"
            )

    @property
    def q(self) -> float:
        return self.r.q

    def spot_check(self, cells: int = SPOT_CHECK_CELLS) -> None:
        """Grid check of the range invariants over [0, 10q]; raises on violation.

        Called by the marching routines before any integration.  The check is a
        sampled guard against misdeclared problems, not a proof.
        """
        q = self.q
        ts = np.linspace(0.0, 10.0 * q, cells + 1)
        bound = self.a.declared_bound
        for t in ts:
            av = self.a.value(float(t))
            if not math.isfinite(av) or av < -_EVAL_SLACK:
                raise ValueError(f"coefficient must be finite and >= 0; a({t})={av}")
            if bound is not None and abs(av) > bound * (1 + 1e-12) + 1e-12:
                raise ValueError(f"coefficient exceeds declared bound {bound}: a({t})={av}")
            rv = self.r.value(float(t))
            if not math.isfinite(rv) or rv < -_EVAL_SLACK or rv > q + _EVAL_SLACK:
                raise ValueError(f"delay must lie in [0, q={q}]; r({t})={rv}")
        for t in np.linspace(-q, 0.0, 1001):
            pv = self.phi.value(float(t))
            if not math.isfinite(pv):
                raise ValueError(f"history must be finite; phi({t})={pv}")


# ---------------------------------------------------------------------------
# JSON problem files
# ---------------------------------------------------------------------------


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


def _coefficient_from_json(obj: dict) -> CoefficientFn:
    kind = obj.get("kind")
    if kind == "constant":
        _require_keys(obj, {"kind", "value", "bound"}, "coefficient")
        return ConstantCoefficient(obj["value"], obj.get("bound"))
    if kind == "sin_affine":
        _require_keys(obj, {"kind", "c0", "c1", "omega", "phase", "bound"}, "coefficient")
        return SinusoidalAffineCoefficient(
            obj["c0"], obj["c1"], obj["omega"], obj.get("phase", 0.0), obj.get("bound")
        )
    if kind == "table":
        _require_keys(obj, {"kind", "points", "bound"}, "coefficient")
        return TabulatedCoefficient(obj["points"], obj.get("bound"))
    raise ValueError(f"unknown coefficient kind: {kind!r}")


def _delay_from_json(obj: dict) -> DelayFn:
    kind = obj.get("kind")
    if kind == "constant":
        _require_keys(obj, {"kind", "value", "q"}, "delay")
        return ConstantDelay(obj["value"], obj["q"])
    if kind == "abs_cos":
        _require_keys(obj, {"kind", "q"}, "delay")
        return AbsCosineDelay(obj["q"])
    if kind == "table":
        _require_keys(obj, {"kind", "points", "q"}, "delay")
        return TabulatedDelay(obj["points"], obj["q"])
    raise ValueError(f"unknown delay kind: {kind!r}")


def _history_from_json(obj: dict, q: float) -> HistoryFn:
    kind = obj.get("kind")
    if kind == "constant":
        _require_keys(obj, {"kind", "value"}, "history")
        return ConstantHistory(obj["value"], q)
    if kind == "poly":
        _require_keys(obj, {"kind", "coeffs"}, "history")
        return PolynomialHistory(tuple(obj["coeffs"]), q)
    if kind == "table":
        _require_keys(obj, {"kind", "points"}, "history")
        return TabulatedHistory(obj["points"])
    raise ValueError(f"unknown history kind: {kind!r}")


def problem_from_dict(obj: dict) -> ProblemSpec:
    _require_keys(obj, {"label", "a", "r", "phi"}, "problem")
    for key in ("label", "a", "r", "phi"):
        if key not in obj:
            raise ValueError(f"problem file is missing {key!r}")
    r = _delay_from_json(obj["r"])
    return ProblemSpec(
        a=_coefficient_from_json(obj["a"]),
        r=r,
        phi=_history_from_json(obj["phi"], r.q),
        label=str(obj["label"]),
    )


def load_problem(path) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))
