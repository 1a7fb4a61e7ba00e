"""Dynamics on the Siegel-Jacobi disk and ball.

Closed-form propagation of Hamiltonians linear in the oscillator ⋊ su(1,1)
generators, by two independent routes — coherent-state (covariant symbol)
equations of motion and a product-of-exponentials factorization — plus a
matrix-Riccati linearization for n degrees of freedom, phase bookkeeping
(dynamical + geometric), and a truncated Fock-space oracle that checks all
of it against direct Schrödinger integration.
"""

from .algebra import (
    BallCoefficients,
    ComplexCoefficients,
    GeneratorIndex,
    GeneratorVector,
    RealCoefficients,
    adjoint_matrix,
    ball_real_decomposition,
    coeffs_from_real,
    coeffs_to_real,
    displacement_phase,
)
from .berezin import (
    LinearizationPair,
    PhaseRecord,
    RiccatiSingularError,
    berry_phase_rhs,
    energy,
    hc_matrix,
    hr_matrix,
    phase_rhs,
    rhs_ball,
    rhs_disk,
    rhs_fc,
    rhs_fc_ball,
    riccati_by_linearization,
    riccati_propagate,
)
from .fockoracle import (
    FockBasisSpec,
    NormDriftError,
    OperatorSet,
    StateVector,
    TruncationError,
    build_generators,
    coherent_vector,
    hamiltonian_matrix,
    propagate,
    solution_fidelity,
)
from .geometry import (
    BallPoint,
    BargmannIndex,
    DiskPoint,
    FCPoint,
    JacobiPoint,
    ball_membership,
    disk_param,
    fc_forward,
    fc_inverse,
    kahler_metric,
    overlap_log,
)
from .runner import (
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    TimeGrid,
    Trajectory,
    integrate,
    run_experiment,
)
from .weinorman import (
    ChartSingularError,
    QuasienergyCoefficients,
    RealState,
    WNParameters,
    adjoint_chain,
    adjoint_chain_product,
    conjugation_dictionary,
    hhat_coeffs,
    hhat_coeffs_real,
    phase_bridge,
    quasienergy_coeffs,
    squeeze_real_params,
    t_inv_tdot,
    t_inv_tdot_real,
    wn_parameters,
    wn_phase_rhs,
    wn_rhs,
    wn_solve_step,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # algebra
    "GeneratorIndex",
    "GeneratorVector",
    "ComplexCoefficients",
    "RealCoefficients",
    "BallCoefficients",
    "adjoint_matrix",
    "coeffs_from_real",
    "coeffs_to_real",
    "displacement_phase",
    "ball_real_decomposition",
    # geometry
    "DiskPoint",
    "BallPoint",
    "JacobiPoint",
    "FCPoint",
    "BargmannIndex",
    "fc_forward",
    "fc_inverse",
    "disk_param",
    "overlap_log",
    "kahler_metric",
    "ball_membership",
    # berezin
    "LinearizationPair",
    "PhaseRecord",
    "RiccatiSingularError",
    "rhs_disk",
    "rhs_fc",
    "rhs_ball",
    "rhs_fc_ball",
    "hc_matrix",
    "hr_matrix",
    "riccati_by_linearization",
    "riccati_propagate",
    "energy",
    "berry_phase_rhs",
    "phase_rhs",
    # weinorman
    "WNParameters",
    "RealState",
    "QuasienergyCoefficients",
    "ChartSingularError",
    "wn_parameters",
    "adjoint_chain",
    "adjoint_chain_product",
    "t_inv_tdot",
    "t_inv_tdot_real",
    "hhat_coeffs",
    "hhat_coeffs_real",
    "wn_rhs",
    "wn_phase_rhs",
    "quasienergy_coeffs",
    "wn_solve_step",
    "squeeze_real_params",
    "phase_bridge",
    "conjugation_dictionary",
    # fockoracle
    "FockBasisSpec",
    "OperatorSet",
    "StateVector",
    "TruncationError",
    "NormDriftError",
    "build_generators",
    "coherent_vector",
    "hamiltonian_matrix",
    "propagate",
    "solution_fidelity",
    # runner
    "TimeGrid",
    "Trajectory",
    "ExperimentConfig",
    "ConfigError",
    "InvariantViolation",
    "integrate",
    "run_experiment",
]
