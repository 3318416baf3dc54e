from __future__ import annotations

import pytest

from pcadde.model import (
    AbsCosineDelay,
    ConstantCoefficient,
    ConstantDelay,
    ConstantHistory,
    PolynomialHistory,
    ProblemSpec,
    SinusoidalAffineCoefficient,
    TabulatedCoefficient,
    TabulatedDelay,
)


def zero_delay(q: float = 1.0) -> TabulatedDelay:
    """r identically 0 with a declared window q > 0 (so k_n = 0 for every n)."""
    return TabulatedDelay(((0.0, 0.0), (1000.0, 0.0)), q)


def showcase_problem(phi_value: float = 5.0) -> ProblemSpec:
    """Oscillating coefficient 1 + sin(t)/3 with |cos t| delay."""
    return ProblemSpec(
        a=SinusoidalAffineCoefficient(1.0, 1.0 / 3.0, 1.0),
        r=AbsCosineDelay(1.0),
        phi=ConstantHistory(phi_value, 1.0),
        label="sin_abscos",
    )


def unit_problem() -> ProblemSpec:
    """a = 1, r = 1, phi = 1: solution 1 - t on [0, 1], then t^2/2 - 2t + 3/2."""
    return ProblemSpec(
        a=ConstantCoefficient(1.0),
        r=ConstantDelay(1.0, 1.0),
        phi=ConstantHistory(1.0, 1.0),
        label="constant_unit",
    )


def frozen_problem() -> ProblemSpec:
    return ProblemSpec(
        a=ConstantCoefficient(0.0),
        r=ConstantDelay(1.0, 1.0),
        phi=ConstantHistory(5.0, 1.0),
        label="frozen",
    )


def tabulated_problem() -> ProblemSpec:
    return ProblemSpec(
        a=TabulatedCoefficient(((0.0, 0.5), (5.0, 1.0), (10.0, 0.75), (20.0, 0.6))),
        r=TabulatedDelay(((0.0, 0.5), (3.0, 1.0), (7.0, 0.25), (20.0, 0.8)), 1.0),
        phi=PolynomialHistory((1.0, -0.5), 1.0),
        label="tabulated_mixed",
    )


def small_delay_problem() -> ProblemSpec:
    return ProblemSpec(
        a=ConstantCoefficient(0.8),
        r=ConstantDelay(0.2, 0.2),
        phi=ConstantHistory(1.0, 0.2),
        label="small_delay",
    )


def corpus() -> list[ProblemSpec]:
    return [showcase_problem(), unit_problem(), frozen_problem(),
            tabulated_problem(), small_delay_problem()]


@pytest.fixture(scope="session")
def showcase():
    return showcase_problem()


@pytest.fixture(scope="session")
def unit():
    return unit_problem()


@pytest.fixture(scope="session")
def problem_corpus():
    return corpus()
