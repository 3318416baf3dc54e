"""Grid discretization of linear variable-delay differential equations.

Discretizes x'(t) = -a(t) x(t - r(t)) by snapping the delayed argument to a
uniform grid, measures the scheme against a high-accuracy reference solution,
and checks the root-equation conditions under which exponential stability
carries over from the continuous equation to the difference scheme.
"""

from .model import (
    AbsCosineDelay,
    ConstantCoefficient,
    ConstantDelay,
    ConstantHistory,
    PolynomialHistory,
    ProblemSpec,
    SinusoidalAffineCoefficient,
    TabulatedCoefficient,
    TabulatedDelay,
    TabulatedHistory,
    eval_coefficient,
    history_norm,
    integrate_coefficient,
    load_problem,
    problem_from_dict,
)
from .discretizer import (
    DiscreteTrajectory,
    PcaExtension,
    StepSize,
    delay_index,
    extend,
    gamma_h,
    iterate,
)
from .reference import DenseSolution, modulus_solution, solve_reference
from .halanay import (
    HalanayProblem,
    TransferConstants,
    TransferReport,
    admissible_steps,
    build_transfer_report,
    envelope,
    fit_transfer_constants,
    k1_of_h,
    solve_eta,
)
from .analysis import (
    ErrorReport,
    ModulusEstimate,
    YorkeVerdict,
    convergence_study,
    error_bound_compact,
    fit_decay_rate,
    measured_error,
    modulus_delay,
    yorke_check,
)
from .errors import FitError, NumericOverflowError

__version__ = "0.1.0"
