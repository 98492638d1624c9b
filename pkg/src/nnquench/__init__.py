"""Quench dynamics of neural-network quantum states on the 1D tilted Ising chain.

Variational Monte Carlo time evolution with two drivers (direct tVMC and
projected per-block infidelity minimization), three stochastic-reconfiguration
solvers (direct, sample-space minSR, blocked K-FAC), Metropolis or exact
full-summation estimators, and a dense state-vector oracle for small chains.
"""

from .ansatz import Fnn, Rbm, activation, load_params, log_two_cosh, save_params
from .errors import ConfigError, NumericError, PreparationError, ResourceError
from .estimators import (
    ForceVector,
    OverlapEstimate,
    build_x_matrix,
    expectation,
    expectation_energy,
    expectation_sigma_x,
    expectation_sigma_z,
    local_energies,
    local_energy,
    local_overlap,
    overlap_and_force,
    tvmc_force,
)
from .evolution import (
    BlockResult,
    FitOptions,
    PtvmcOptions,
    StepResult,
    learning_rate_at,
    prepare_initial_state,
    ptvmc_block_optimize,
    ptvmc_step,
    tvmc_derivative,
    tvmc_rk4_step,
)
from .oracle import (
    ExactEvolution,
    MeritSeries,
    amplitude_ratio_and_phase_distance,
    dense_hamiltonian,
    evolve_with_schedule,
    exact_evolve,
    exact_infidelity,
    integrate_series,
    load_dense_state,
    nnqs_to_dense,
    ranked_configurations,
    save_dense_state,
    state_infidelity,
    uniform_state,
)
from .sampling import (
    SampleSet,
    SamplerConfig,
    acceptance_probability,
    draw_samples,
    full_summation,
    metropolis_sample,
)
from .solvers import (
    SolverConfig,
    SolverDiagnostics,
    kfac_partition,
    solve,
    solve_direct,
    solve_kfac,
    solve_kfac_sweep,
    solve_minsr,
    validate_partition,
)
from .spin_model import (
    TiltedIsingModel,
    TrotterBlock,
    TrotterSchedule,
    block_generator,
    block_unitary,
    bond_durations,
    bond_term,
    build_model,
    configuration_index,
    connected_elements,
    diagonal_energy,
    embed_operator,
    enumerate_configurations,
    trotter_schedule,
)

__version__ = "0.1.0"
