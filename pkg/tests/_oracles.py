"""Independent oracles for the test suite: adaptive Simpson quadrature and
high-precision root finding / evaluation via mpmath.  These deliberately share
no code with the package so that agreement is evidence, not tautology."""
from __future__ import annotations

import mpmath as mp


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12) -> float:
    """Classic adaptive Simpson with Richardson correction."""
    if b == a:
        return 0.0

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, fa, flm, fm, left, eps / 2.0, depth - 1)
                + recurse(mid, hi, fm, frm, fb, right, eps / 2.0, depth - 1))

    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)


def bisect_eta(alpha: float, beta: float, q: float, dps: int = 30) -> float:
    """High-precision bisection for the root of eta = alpha - beta*exp(eta*q)."""
    with mp.workdps(dps):
        al, be, qq = mp.mpf(alpha), mp.mpf(beta), mp.mpf(q)

        def f(eta):
            return eta - al + be * mp.e ** (eta * qq)

        lo, hi = mp.mpf(0), al - be
        for _ in range(120):
            mid = (lo + hi) / 2
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        return float((lo + hi) / 2)


def mp_interp(samples, t, dps: int = 30):
    """High-precision piecewise-linear interpolation with constant extension."""
    with mp.workdps(dps):
        tt = mp.mpf(t)
        if tt <= samples[0][0]:
            return mp.mpf(samples[0][1])
        if tt >= samples[-1][0]:
            return mp.mpf(samples[-1][1])
        for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
            if mp.mpf(t0) <= tt <= mp.mpf(t1):
                t0, v0, t1, v1 = map(mp.mpf, (t0, v0, t1, v1))
                return v0 + (v1 - v0) * (tt - t0) / (t1 - t0)
    raise AssertionError("unreachable")
