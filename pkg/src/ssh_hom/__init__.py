"""Tunable beam splitting and Hong-Ou-Mandel interference via SSH edge states."""

__version__ = "0.1.0"

from .model import (
    CLEAN,
    DisorderDraw,
    DisorderSpec,
    LatticeSpec,
    Schedule,
    bloch_hamiltonian,
    build_hamiltonian,
    chiral_operator,
    default_step_count,
    hamiltonian_time_derivative,
    intracell_amplitude,
    inversion_operator,
    sample_disorder,
)
from .spectral import (
    AnalyticEdgeStates,
    EdgePair,
    EigenSystem,
    GapCollapseError,
    analytic_edge_states,
    diagonalize,
    distribution_difference,
    equal_support_check,
    hybrid_energy_formula,
    in_gap_pair,
    spectrum_over_schedule,
    transition_element,
)
from .dynamics import (
    ConvergenceError,
    PhaseReport,
    Propagator,
    Trajectory,
    adiabaticity_metric,
    beam_splitter_scan,
    calibrate_t_final,
    dynamical_phase,
    end_state,
    evolve_states,
    mean_ingap_energy,
    parity_superposition,
    parity_trajectory,
    propagate,
    resolved_steps,
)
from .multiparticle import (
    TwoParticleState,
    correlation,
    density,
    fock_evolve_oracle,
    hom_output,
    noon_fidelity,
    noon_fidelity_phase_optimized,
    noon_state,
    noonity,
    pair_amplitude_matrix,
    product_pair_state,
    two_particle_hamiltonian,
)
from .ensemble import (
    EnsembleResult,
    ExperimentConfig,
    RegimeReport,
    realization_seed,
    run_ensemble,
    symmetry_regime_study,
    tf_scan,
)
