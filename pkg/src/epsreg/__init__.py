"""Epsilon-regularization of ill-posed Cauchy problems.

The package solves the perturbed normal equation (T*T + eps I) u = T* f
+ eps h for abstract dense operators, classifies solvability from the
boundedness of the eps-family, and provides the fully explicit spectral
machinery for the perturbed mixed problems on the unit disk (gradient and
Cauchy-Riemann operators), together with the closed-form 1D example used
as analytic ground truth.
"""

from .bessel import RadialFactor, bessel_i, bessel_i_prime, radial_factor_eval
from .core import (
    DiscreteOperator,
    PerturbedSolution,
    RegularizationPath,
    Verdict,
    kernel_orthogonality_check,
    load_matrix,
    minimal_norm_solution,
    parse_matrix_text,
    run_path,
    solve_perturbed,
)
from .diskbasis import (
    BasisFunction,
    DiracOperatorKind,
    apply_operator,
    check_helmholtz,
    enumerate_modes,
    evaluate,
    nonvanishing_check,
    normal_trace,
    symbol_defect,
)
from .errors import EpsregError, InputError, NumericError
from .ode1d import Ode1dProblem, convergence_report, exact_solution, perturbed_solution
from .variational import (
    ArcSpec,
    CauchyProblemSpec,
    DiskQuadrature,
    Field,
    TrialSpace,
    boundary_form_h,
    build_trial_space,
    cauchy_pipeline,
    gram_schmidt,
    inner_eps,
    lift_cauchy_datum,
    solve_mixed_boundary_series,
    solve_perturbed_galerkin,
)

__version__ = "0.1.0"
