"""MIMO transmit beampattern matching by majorization-minimization."""

from .array_model import (
    AngleGrid,
    ArrayGeometry,
    Waveform,
    beampattern,
    beampattern_profile,
    cross_correlation,
    steering_matrix,
    steering_vector,
)
from .constraints import (
    ConstModulus,
    Energy,
    EnergyPar,
    ModulusSimilarity,
    par,
    project_feasibility_check,
    solve_energy,
    solve_energy_par,
    solve_modulus,
    solve_modulus_similarity,
    solve_subproblem,
)
from .majorizer import (
    MajorizerParts,
    assemble_y,
    build_BE,
    build_BJ,
    build_parts,
    psi_E1,
    psi_E2,
    psi_J1,
    psi_J2,
    toeplitz_lmax_bound,
)
from .objective import (
    PatternSpec,
    matching_error,
    mse_metric,
    optimal_alpha,
    sidelobe_energy,
    total_objective,
)
from .solver import (
    MMSolver,
    MonotonicityError,
    Problem,
    RunReport,
    SolverOptions,
    SolverState,
    Status,
    initialize,
    run,
)

__version__ = "0.1.0"
