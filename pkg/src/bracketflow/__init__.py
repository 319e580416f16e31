"""Double-bracket flows, Bloch-sphere thermalization, and canonical
ensembles of 2x2 (and desk-scale NxN) Hermitian Hamiltonians."""

from .hermitian_core import (
    IDENTITY_2,
    PAULI,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BlochDecomposition,
    ReferenceFrame,
    commutator,
    commutator_norm_sq,
    double_bracket_rhs,
    eigenvalues,
    from_bloch,
    hermitian,
    jacobi_eigh,
    to_bloch,
    trace_distance_sq,
)
from .bracket_flow import (
    FlowVariant,
    Trajectory,
    anti_sorting_check,
    bloch_vector_field,
    closed_form_2x2,
    flow_diagnostics,
    gradient_drift,
    integrate_flow,
)
from .thermalization import (
    EnsembleStats,
    Interpretation,
    SdeParams,
    sample_equilibrium,
    sde_step_spherical,
    sde_step_x,
    simulate_ensemble,
    simulate_path,
)
from .fokker_planck import (
    DensityGrid,
    GridVariable,
    Measure,
    canonical_density_general,
    evolve_fp_x,
    fp_operator_theta,
    make_grid,
    stationarity_residual,
    stationary_density,
    stationary_density_x,
)
from .ensembles import (
    AverageCurve,
    ThermalParams,
    annealed_average_G,
    annealed_average_mc,
    figure_defaults,
    mean_cos_theta,
    mean_hamiltonian,
    quenched_average_G,
    quenched_average_mc,
    sweep_temperature,
    thermal_expectation,
)

__version__ = "0.1.0"
