from __future__ import annotations

import math

import numpy as np
import pytest

from pcadde.errors import NumericOverflowError
from pcadde.model import (
    ConstantCoefficient,
    ConstantDelay,
    ConstantHistory,
    ProblemSpec,
    SinusoidalAffineCoefficient,
)
from pcadde.reference import modulus_solution, solution_csv, solve_reference

from conftest import frozen_problem, showcase_problem, unit_problem, zero_delay

FS = 1.0 / 256.0


def unit_exact(t: float) -> float:
    """Hand method-of-steps for a=1, r=1, phi=1 on [-1, 2]."""
    if t <= 0:
        return 1.0
    if t <= 1:
        return 1.0 - t
    return t * t / 2.0 - 2.0 * t + 1.5


class TestAnalyticAgreement:
    def test_linear_segment_and_endpoint(self):
        sol = solve_reference(unit_problem(), 2.0, FS)
        for t in np.linspace(0.0, 2.0, 801):
            assert sol.eval(float(t)) == pytest.approx(unit_exact(float(t)), abs=1e-8)
        assert sol.eval(2.0) == pytest.approx(-0.5, abs=1e-8)

    def test_hermite_reproduces_linear_exactly(self):
        sol = solve_reference(unit_problem(), 1.0, FS)
        # midpoints of node intervals on the 1 - t stretch
        for j in range(0, 256, 17):
            t = (j + 0.5) * FS
            assert sol.eval(t) == pytest.approx(1.0 - t, abs=1e-10)

    def test_zero_coefficient_constant_solution(self):
        sol = solve_reference(frozen_problem(), 3.0, FS)
        assert all(v == 5.0 for v in sol.values)

    def test_undelayed_exponential(self):
        c = 0.5
        spec = ProblemSpec(ConstantCoefficient(c), zero_delay(1.0),
                           ConstantHistory(1.0, 1.0), "exp")
        sol = solve_reference(spec, 4.0, 1.0 / 64.0)
        for t in np.linspace(0.0, 4.0, 101):
            assert sol.eval(float(t)) == pytest.approx(math.exp(-c * t), rel=1e-4)


class TestEval:
    def test_history_is_exact(self):
        spec = showcase_problem()
        sol = solve_reference(spec, 1.0, FS)
        for t in np.linspace(-1.0, 0.0, 97):
            assert sol.eval(float(t)) == spec.phi.value(float(t))

    def test_nodes_collocated(self):
        sol = solve_reference(showcase_problem(), 2.0, FS)
        for j in range(0, len(sol.values), 31):
            assert sol.eval(float(sol.node_times()[j])) == sol.values[j]

    def test_domain_errors(self):
        sol = solve_reference(unit_problem(), 1.0, FS)
        with pytest.raises(ValueError):
            sol.eval(-1.5)
        with pytest.raises(ValueError):
            sol.eval(1.25)


class TestPreconditions:
    def test_fine_step_cap(self):
        with pytest.raises(ValueError, match="fine_step"):
            solve_reference(unit_problem(), 1.0, 0.25)  # > q/16
        with pytest.raises(ValueError, match="fine_step"):
            solve_reference(unit_problem(), 1.0, 0.0)

    def test_horizon_positive(self):
        with pytest.raises(ValueError, match="horizon"):
            solve_reference(unit_problem(), 0.0, FS)

    def test_overflow_names_time(self):
        spec = ProblemSpec(ConstantCoefficient(1e200), zero_delay(1.0),
                           ConstantHistory(1.0, 1.0), "boom")
        with pytest.raises(NumericOverflowError, match="t="):
            solve_reference(spec, 1.0, 1.0 / 16.0)


class TestStoredDerivatives:
    @pytest.mark.parametrize("spec", [showcase_problem(), unit_problem()])
    def test_node_derivative_residual(self, spec):
        # stored derivative == -a(t) * x(t - r(t)) read back off the dense output
        sol = solve_reference(spec, 4.0, FS)
        ts = sol.node_times()
        worst = 0.0
        for j in range(len(ts)):
            t = float(ts[j])
            delayed = t - spec.r.value(t)
            worst = max(worst, abs(sol.derivs[j] + spec.a.value(t) * sol.eval(delayed)))
        assert worst <= 1e-9


class TestSelfConvergence:
    def test_halving_changes_little(self):
        spec = showcase_problem()
        coarse = solve_reference(spec, 5.0, 1.0 / 64.0)
        fine = solve_reference(spec, 5.0, 1.0 / 128.0)
        probes = np.linspace(0.0, 5.0, 100)
        diff = max(abs(coarse.eval(float(t)) - fine.eval(float(t))) for t in probes)
        assert diff <= 1.0 / 64.0  # first order is the floor guarantee

    def test_high_order_on_smooth_constant_delay(self):
        # smooth coefficient, delay bounded well away from the step size
        spec = ProblemSpec(SinusoidalAffineCoefficient(1.0, 0.25, 0.7),
                           ConstantDelay(1.0, 1.0), ConstantHistory(1.0, 1.0), "smooth")
        ref = solve_reference(spec, 3.0, 1.0 / 512.0)
        errs = []
        for fs in (1.0 / 32.0, 1.0 / 64.0):
            sol = solve_reference(spec, 3.0, fs)
            errs.append(max(abs(sol.eval(float(t)) - ref.eval(float(t)))
                            for t in np.linspace(0.25, 3.0, 64)))
        order = math.log2(errs[0] / errs[1])
        assert order > 2.5

    def test_deterministic_rerun(self):
        spec = showcase_problem()
        a = solve_reference(spec, 10.0, FS)
        b = solve_reference(spec, 10.0, FS)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.derivs, b.derivs)


class TestModulus:
    def test_constant_solution_zero(self):
        sol = solve_reference(frozen_problem(), 2.0, FS)
        assert modulus_solution(sol, 0.3, 2.0) == 0.0

    def test_linear_stretch(self):
        sol = solve_reference(unit_problem(), 1.0, FS)
        got = modulus_solution(sol, 0.1, 1.0)
        # slope-1 stretch: exact value 0.1, grid windowing may add one cell
        assert 0.1 - 1e-12 <= got <= 0.1 + 2.0 * FS

    def test_matches_bruteforce_pair_scan(self):
        spec = showcase_problem()
        sol = solve_reference(spec, 5.0, FS)
        delta = 0.05
        got = modulus_solution(sol, delta, 5.0)
        # independent scan over all sample pairs at offsets up to ceil(delta/dt)
        n_hist = int(math.ceil(1.0 / FS))
        hist_ts = -1.0 + np.arange(n_hist) * (1.0 / n_hist)
        samples = np.concatenate([
            np.array([spec.phi.value(float(t)) for t in hist_ts]),
            sol.values,
        ])
        w = int(math.ceil(delta / FS - 1e-12))
        brute = max(np.max(np.abs(samples[off:] - samples[:-off])) for off in range(1, w + 1))
        assert got == pytest.approx(brute, abs=1e-15)
        assert got > 0.0

    def test_monotone_in_delta(self):
        sol = solve_reference(showcase_problem(), 5.0, FS)
        vals = [modulus_solution(sol, d, 5.0) for d in (0.02, 0.1, 0.5, 2.0)]
        assert vals == sorted(vals)

    def test_horizon_checked(self):
        sol = solve_reference(unit_problem(), 1.0, FS)
        with pytest.raises(ValueError):
            modulus_solution(sol, 0.1, 2.0)
        with pytest.raises(ValueError):
            modulus_solution(sol, 0.0, 1.0)


class TestCsv:
    def test_columns_and_span(self):
        sol = solve_reference(unit_problem(), 1.0, FS)
        lines = solution_csv(sol).strip().split("\n")
        assert lines[0] == "t,x"
        first_t = float(lines[1].split(",")[0])
        last_t, last_x = (float(v) for v in lines[-1].split(","))
        assert first_t == -1.0
        assert last_t == pytest.approx(1.0)
        assert last_x == pytest.approx(0.0, abs=1e-10)

    def test_write_round_trip(self, tmp_path):
        from pcadde.reference import write_solution_csv

        sol = solve_reference(unit_problem(), 1.0, FS)
        path = tmp_path / "solution.csv"
        write_solution_csv(sol, path)
        assert path.read_text() == solution_csv(sol)
